#pragma once

#include <optional>

#include "factorreg/factor.hpp"
#include "factorreg/regression.hpp"

namespace factorreg {

enum class VarMode { Dense, Sparse };

/// Everything needed to go from (Y, Z) to forecasts.
struct PipelineConfig {
  regression::RegressionConfig regression;
  factor::FactorConfig factor;
  /// VAR mode for the regressors; nullopt picks Sparse when m > T/4.
  std::optional<VarMode> z_var_mode;
  /// Penalty of sparse VAR fits; <= 0 uses the theory rule with c = 1.
  double var_lambda = 0.0;

  void validate() const;
};

struct PipelineFit {
  regression::RegressionFit regression;
  factor::FactorEstimate factor;
};

/// Stage 1 regression followed by the factor model on its residuals. The
/// white-noise trimming uses the actual regressor count of z.
PipelineFit fit_pipeline(const SeriesMatrix& y, const SeriesMatrix& z, const PipelineConfig& cfg);

}  // namespace factorreg
