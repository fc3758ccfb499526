#include "factorreg/pipeline.hpp"

namespace factorreg {

void PipelineConfig::validate() const {
  regression.validate();
  factor.wn.validate();
  if (factor.k0 < 1) throw ConfigError("k0 must be >= 1");
  if (factor.r && *factor.r < 0) throw ConfigError("r must be >= 0");
  if (factor.d_u && *factor.d_u < 1) throw ConfigError("d_u must be >= 1");
}

PipelineFit fit_pipeline(const SeriesMatrix& y, const SeriesMatrix& z, const PipelineConfig& cfg) {
  cfg.validate();
  PipelineFit out;
  out.regression = regression::fit(y, z, cfg.regression);
  factor::FactorConfig fcfg = cfg.factor;
  fcfg.wn.m_regressors = z.dim();
  out.factor = factor::fit_factor_model(out.regression.residuals, fcfg);
  return out;
}

}  // namespace factorreg
