#include "factorreg/forecast.hpp"

#include <cmath>
#include <string>

#include "factorreg/metrics.hpp"

namespace factorreg::forecast {
namespace {

double spectral_radius(const Matrix& phi) {
  if (phi.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> solver(phi, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

VarFit fit_var1(const Matrix& x, VarMode mode, double lambda) {
  const auto T = x.rows();
  const auto d = x.cols();
  VarFit out;
  out.mode = mode;
  if (d == 0) {
    out.Phi = Matrix(0, 0);
    out.intercept = Vector(0);
    return out;
  }
  if (T < 3) throw DimensionError("fit_var1: need at least 3 time points");
  const SeriesMatrix next(x.bottomRows(T - 1));
  const SeriesMatrix prev(x.topRows(T - 1));

  regression::RegressionFit fit;
  if (mode == VarMode::Dense) {
    if (T < d + 2) {
      throw DimensionError("fit_var1: dense mode needs T >= d + 2 (T=" + std::to_string(T) +
                           ", d=" + std::to_string(d) + ")");
    }
    try {
      fit = regression::fit_ols(next, prev, /*intercept=*/true);
    } catch (const InsufficientSamplesError& e) {
      throw SingularGramError(std::string("fit_var1: ") + e.what() + "; use SPARSE mode");
    } catch (const SingularGramError& e) {
      throw SingularGramError(std::string("fit_var1: ") + e.what() + "; use SPARSE mode");
    }
  } else {
    regression::RegressionConfig cfg;
    cfg.mode = regression::Mode::LASSO;
    cfg.lambda_rule = lambda > 0.0 ? regression::LambdaRule::fixed(lambda)
                                   : regression::LambdaRule::theory(1.0);
    fit = regression::fit_lasso(next, prev, cfg);
  }
  out.Phi = fit.Bhat;
  out.intercept = fit.intercept;
  out.spectral_radius = spectral_radius(out.Phi);
  if (out.spectral_radius >= 1.0) out.warnings.push_back(Warning::NonStationaryVar);
  return out;
}

VarFit fit_var1(const SeriesMatrix& x, VarMode mode, double lambda) {
  return fit_var1(x.values(), mode, lambda);
}

ForecastResult predict(const regression::RegressionFit& fit_r, const factor::FactorEstimate& fit_f,
                       const VarFit& var_z, const VarFit& var_x, const Vector& z_last,
                       const Vector& x_last, int h, const std::optional<Matrix>& zhat_override) {
  if (h < 1) throw ConfigError("predict: horizon h must be >= 1");
  const auto m = fit_r.Bhat.cols();
  const auto p = fit_r.Bhat.rows();
  const auto r = fit_f.A1hat.k();
  if (z_last.size() != m || x_last.size() != r || var_x.Phi.rows() != r ||
      fit_f.A1hat.p() != p) {
    throw DimensionError("predict: state vectors or VAR fits do not match the model");
  }
  if (!zhat_override && var_z.Phi.rows() != m) {
    throw DimensionError("predict: regressor VAR has the wrong dimension");
  }
  if (zhat_override && (zhat_override->rows() != h || zhat_override->cols() != m)) {
    throw DimensionError("predict: zhat_override must be h x m");
  }

  ForecastResult out;
  out.zhat.resize(h, m);
  out.xhat.resize(h, r);
  Vector z = z_last;
  Vector x = x_last;
  for (int j = 0; j < h; ++j) {
    z = zhat_override ? Vector(zhat_override->row(j).transpose()) : var_z.step(z);
    x = var_x.step(x);
    if (!z.allFinite() || !x.allFinite()) {
      throw NumericalOverflowError("predict: non-finite iterate at step " + std::to_string(j + 1));
    }
    out.zhat.row(j) = z.transpose();
    out.xhat.row(j) = x.transpose();
  }
  out.yhat = out.zhat * fit_r.Bhat.transpose() + out.xhat * fit_f.A1hat.matrix().transpose();
  out.yhat.rowwise() += fit_r.intercept.transpose();
  return out;
}

RollingResult rolling_evaluate(const SeriesMatrix& y, const SeriesMatrix& z, int T0,
                               const PipelineConfig& cfg) {
  const auto T = y.T();
  if (z.T() != T) throw DimensionError("rolling_evaluate: Y and Z have different T");
  if (T0 < 1 || T0 >= T - 20) {
    throw ConfigError("rolling_evaluate: need 1 <= T0 < T - 20 (T0=" + std::to_string(T0) +
                      ", T=" + std::to_string(T) + ")");
  }
  cfg.validate();
  const auto p = y.dim();

  RollingResult out;
  std::vector<Vector> with;
  std::vector<Vector> without;
  std::vector<Vector> actual;
  for (Eigen::Index tau = T - T0; tau < T; ++tau) {
    try {
      const SeriesMatrix y_train = y.slice(0, tau);
      const SeriesMatrix z_train = z.slice(0, tau);
      const PipelineFit fit = fit_pipeline(y_train, z_train, cfg);

      const VarMode z_mode = cfg.z_var_mode.value_or(
          4 * z.dim() > tau ? VarMode::Sparse : VarMode::Dense);
      const VarFit var_z = fit_var1(z_train, z_mode, cfg.var_lambda);
      const VarFit var_x = fit_var1(fit.factor.xhat, VarMode::Dense);

      const Vector z_last = z_train.values().row(tau - 1).transpose();
      const Vector x_last = fit.factor.rhat > 0
                                ? Vector(fit.factor.xhat.row(tau - 1).transpose())
                                : Vector(0);
      const ForecastResult fc = predict(fit.regression, fit.factor, var_z, var_x, z_last, x_last, 1);
      const Vector regression_only =
          fit.regression.intercept + fit.regression.Bhat * fc.zhat.row(0).transpose();

      with.push_back(fc.yhat.row(0).transpose());
      without.push_back(regression_only);
      actual.push_back(y.values().row(tau).transpose());
      out.origins.push_back(tau);
      out.rhat.push_back(fit.factor.rhat);
    } catch (const Error& e) {
      ++out.failures;
      out.failure_messages.push_back("origin " + std::to_string(tau) + ": " + e.what());
    }
  }
  const auto n = static_cast<Eigen::Index>(with.size());
  out.yhat_with_factors.resize(n, p);
  out.yhat_regression_only.resize(n, p);
  out.y_actual.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.yhat_with_factors.row(i) = with[static_cast<std::size_t>(i)].transpose();
    out.yhat_regression_only.row(i) = without[static_cast<std::size_t>(i)].transpose();
    out.y_actual.row(i) = actual[static_cast<std::size_t>(i)].transpose();
  }
  if (n == 0) throw Error("rolling_evaluate: every forecast origin failed");
  out.fe_with_factors = metrics::forecast_error(out.yhat_with_factors, out.y_actual);
  out.fe_regression_only = metrics::forecast_error(out.yhat_regression_only, out.y_actual);
  return out;
}

}  // namespace factorreg::forecast
