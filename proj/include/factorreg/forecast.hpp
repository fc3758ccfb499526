#pragma once

#include <optional>
#include <string>
#include <vector>

#include "factorreg/pipeline.hpp"

namespace factorreg::forecast {

/// First-order VAR with intercept: x_t = intercept + Phi x_{t-1} + noise.
struct VarFit {
  int order = 1;
  Matrix Phi;
  Vector intercept;
  VarMode mode = VarMode::Dense;
  double spectral_radius = 0.0;
  std::vector<Warning> warnings;  // NonStationaryVar when spectral_radius >= 1

  Vector step(const Vector& x) const { return intercept + Phi * x; }
};

/// Dense: least squares of x_t on (1, x_{t-1}); needs T >= d + 2 and throws
/// SingularGramError (suggesting Sparse) on a singular design.
/// Sparse: equation-wise Lasso with refit; lambda <= 0 uses the theory rule.
VarFit fit_var1(const SeriesMatrix& x, VarMode mode, double lambda = 0.0);
VarFit fit_var1(const Matrix& x, VarMode mode, double lambda = 0.0);

struct ForecastResult {
  Matrix yhat;  // h x p
  Matrix zhat;  // h x m
  Matrix xhat;  // h x rhat
};

/// Iterates both VARs h steps from (z_T, x_T) and assembles
///   yhat = intercept' + zhat Bhat' + xhat A1hat'
/// row by row. `zhat_override` (h x m) replaces the VAR path of z when the
/// regressors are known in advance.
ForecastResult predict(const regression::RegressionFit& fit_r, const factor::FactorEstimate& fit_f,
                       const VarFit& var_z, const VarFit& var_x, const Vector& z_last,
                       const Vector& x_last, int h,
                       const std::optional<Matrix>& zhat_override = std::nullopt);

struct RollingResult {
  double fe_with_factors = 0.0;
  double fe_regression_only = 0.0;
  Matrix yhat_with_factors;    // successful origins only
  Matrix yhat_regression_only;
  Matrix y_actual;
  std::vector<Eigen::Index> origins;  // training length tau of each row above
  std::vector<int> rhat;
  int failures = 0;
  std::vector<std::string> failure_messages;
};

/// Rolling-origin one-step evaluation over the last T0 periods: for each
/// tau = T-T0..T-1 the whole pipeline is refit on rows [0, tau) and row
/// tau is forecast with and without the latent factor term. Failing origins
/// are recorded and skipped.
RollingResult rolling_evaluate(const SeriesMatrix& y, const SeriesMatrix& z, int T0,
                               const PipelineConfig& cfg);

}  // namespace factorreg::forecast
