#include <optional>
#include <string>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "factorreg/errors.hpp"
#include "factorreg/factor.hpp"
#include "factorreg/forecast.hpp"
#include "factorreg/metrics.hpp"
#include "factorreg/pipeline.hpp"
#include "factorreg/regression.hpp"
#include "factorreg/simulate.hpp"
#include "factorreg/whitenoise.hpp"

namespace py = pybind11;
using namespace py::literals;
using namespace factorreg;

namespace {

regression::RegressionConfig make_regression(const std::string& mode, const std::string& rule,
                                             double lambda, bool refit) {
  regression::RegressionConfig rc;
  if (mode == "ols") {
    rc.mode = regression::Mode::OLS;
  } else if (mode == "lasso") {
    rc.mode = regression::Mode::LASSO;
  } else {
    throw ConfigError("mode must be 'ols' or 'lasso'");
  }
  if (rule == "theory") {
    rc.lambda_rule = regression::LambdaRule::theory(lambda);
  } else if (rule == "fixed") {
    rc.lambda_rule = regression::LambdaRule::fixed(lambda);
  } else if (rule == "bic") {
    rc.lambda_rule = regression::LambdaRule::bic();
  } else {
    throw ConfigError("lambda_rule must be 'theory', 'fixed' or 'bic'");
  }
  rc.refit = refit;
  return rc;
}

PipelineConfig make_pipeline(const std::string& mode, const std::string& rule, double lambda,
                             bool refit, std::optional<int> r, int k0, int N, double alpha) {
  PipelineConfig pc;
  pc.regression = make_regression(mode, rule, lambda, refit);
  pc.factor.r = r;
  pc.factor.k0 = k0;
  pc.factor.wn.N = N;
  pc.factor.wn.alpha = alpha;
  return pc;
}

py::dict regression_dict(const regression::RegressionFit& f) {
  return py::dict("Bhat"_a = f.Bhat, "intercept"_a = f.intercept,
                  "residuals"_a = f.residuals.values(), "lambdas"_a = f.lambdas,
                  "supports"_a = f.supports);
}

simulate::SimScenario make_scenario(const std::string& design, Eigen::Index p, Eigen::Index T,
                                    std::optional<Eigen::Index> m, int r, int s, double delta1,
                                    double delta2, std::uint64_t seed, std::uint64_t design_seed) {
  simulate::SimScenario sc;
  sc.design = simulate::design_from_string(design);
  sc.p = p;
  sc.T = T;
  sc.m = m.value_or(sc.design == simulate::Design::Example2 ? 40 : 5);
  sc.r = r;
  sc.s = s;
  sc.delta1 = delta1;
  sc.delta2 = delta2;
  sc.seed = seed;
  sc.design_seed = design_seed;
  return sc;
}

}  // namespace

PYBIND11_MODULE(_factorreg, m) {
  m.doc() = "Regression with latent factor structure for high-dimensional time series";

  auto base = py::register_exception<Error>(m, "FactorregError", PyExc_RuntimeError);
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<LagError>(m, "LagError", base.ptr());
  py::register_exception<RankError>(m, "RankError", base.ptr());

  m.def(
      "simulate",
      [](const std::string& design, Eigen::Index p, Eigen::Index T, std::optional<Eigen::Index> mm,
         int r, int s, double delta1, double delta2, std::uint64_t seed,
         std::uint64_t design_seed) {
        const auto truth = simulate::simulate(
            make_scenario(design, p, T, mm, r, s, delta1, delta2, seed, design_seed));
        return py::dict("y"_a = truth.y, "z"_a = truth.z, "B"_a = truth.B, "L1"_a = truth.L1,
                        "L2"_a = truth.L2, "f"_a = truth.f, "eps"_a = truth.eps);
      },
      "design"_a = "example1", "p"_a = 50, "T"_a = 300, "m"_a = py::none(), "r"_a = 3, "s"_a = 3,
      "delta1"_a = 0.0, "delta2"_a = 0.0, "seed"_a = 1, "design_seed"_a = 1234);

  m.def(
      "fit_ols",
      [](const Matrix& y, const Matrix& z, bool intercept) {
        return regression_dict(regression::fit_ols(SeriesMatrix(y), SeriesMatrix(z), intercept));
      },
      "y"_a, "z"_a, "intercept"_a = false);

  m.def(
      "fit_lasso",
      [](const Matrix& y, const Matrix& z, const std::string& lambda_rule, double lambda,
         bool refit) {
        return regression_dict(regression::fit_lasso(
            SeriesMatrix(y), SeriesMatrix(z), make_regression("lasso", lambda_rule, lambda, refit)));
      },
      "y"_a, "z"_a, "lambda_rule"_a = "theory", "lam"_a = 1.0, "refit"_a = true);

  m.def(
      "autocovariances",
      [](const Matrix& e, int k0) { return factor::autocovariances(SeriesMatrix(e), k0).sigma; },
      "e"_a, "k0"_a);

  m.def(
      "fit_pipeline",
      [](const Matrix& y, const Matrix& z, const std::string& mode, const std::string& lambda_rule,
         double lambda, bool refit, std::optional<int> r, int k0, int N, double alpha) {
        const auto pc = make_pipeline(mode, lambda_rule, lambda, refit, r, k0, N, alpha);
        const auto fit = fit_pipeline(SeriesMatrix(y), SeriesMatrix(z), pc);
        const auto& ff = fit.factor;
        py::list decisions;
        for (const auto& d : ff.decisions) {
          decisions.append(py::dict("statistic"_a = d.statistic,
                                    "critical_value"_a = d.critical_value, "reject"_a = d.reject,
                                    "d_whitened"_a = d.d_whitened));
        }
        py::dict out = regression_dict(fit.regression);
        out["rhat"] = ff.rhat;
        out["shat"] = ff.shat;
        out["A1hat"] = ff.A1hat.matrix();
        out["xhat"] = ff.xhat;
        out["M_eigs"] = ff.M_eigs;
        out["S_eigs"] = ff.S_eigs;
        out["decisions"] = decisions;
        return out;
      },
      "y"_a, "z"_a, "mode"_a = "ols", "lambda_rule"_a = "theory", "lam"_a = 1.0,
      "refit"_a = true, "r"_a = py::none(), "k0"_a = 2, "N"_a = 10, "alpha"_a = 0.05);

  m.def("distance_d",
        [](const Matrix& h1, const Matrix& h2) {
          return metrics::distance_d(OrthonormalBasis(h1), OrthonormalBasis(h2));
        },
        "h1"_a, "h2"_a);
  m.def("distance_dbar", &metrics::distance_dbar, "h1"_a, "h2"_a);
  m.def("factor_rmse",
        py::overload_cast<const Matrix&, const Matrix&, const Matrix&, const Matrix&>(
            &metrics::factor_rmse),
        "ahat"_a, "xhat"_a, "l1"_a, "f"_a);
  m.def("forecast_error", &metrics::forecast_error, "yhat"_a, "y"_a);

  m.def("gumbel_critical_value", &whitenoise::gumbel_critical_value, "K"_a, "alpha"_a);
  m.def("rank_autocorr",
        [](const Matrix& u, int k) { return whitenoise::rank_autocorr(u, k); }, "u"_a, "k"_a);
  m.def(
      "test_white_noise",
      [](const Matrix& u, int N, double alpha) {
        const auto d = whitenoise::test_white_noise(u, N, alpha);
        return py::dict("statistic"_a = d.statistic, "critical_value"_a = d.critical_value,
                        "reject"_a = d.reject, "K_effective"_a = d.K_effective);
      },
      "u"_a, "N"_a = 10, "alpha"_a = 0.05);

  m.def(
      "rolling_evaluate",
      [](const Matrix& y, const Matrix& z, int T0, const std::string& mode, std::optional<int> r) {
        const auto pc = make_pipeline(mode, mode == "lasso" ? "bic" : "theory", 1.0, true, r, 2,
                                      10, 0.05);
        const auto res = forecast::rolling_evaluate(SeriesMatrix(y), SeriesMatrix(z), T0, pc);
        return py::dict("fe_with_factors"_a = res.fe_with_factors,
                        "fe_regression_only"_a = res.fe_regression_only,
                        "yhat_with_factors"_a = res.yhat_with_factors,
                        "yhat_regression_only"_a = res.yhat_regression_only,
                        "y_actual"_a = res.y_actual, "failures"_a = res.failures);
      },
      "y"_a, "z"_a, "T0"_a = 24, "mode"_a = "ols", "r"_a = py::none());

  m.def(
      "replicate",
      [](const std::string& design, Eigen::Index p, Eigen::Index T, double delta1, double delta2,
         int n_reps, std::uint64_t seed, int jobs) {
        const auto sc = make_scenario(design, p, T, std::nullopt, 3, 3, delta1, delta2, seed, 1234);
        simulate::ReplicationReport rep;
        {
          py::gil_scoped_release release;
          rep = simulate::replicate(sc, n_reps, simulate::default_pipeline(sc.design),
                                    simulate::kMetricAll, jobs);
        }
        py::list rhat;
        for (const auto& rec : rep.records) rhat.append(rec.rhat);
        return py::dict("p_rhat_eq_r"_a = rep.prob_rhat_correct, "failures"_a = rep.failures,
                        "b_error_median"_a = rep.b_error.median, "dbar_median"_a = rep.dbar.median,
                        "rmse_median"_a = rep.rmse.median, "rhat"_a = rhat);
      },
      "design"_a = "example1", "p"_a = 50, "T"_a = 300, "delta1"_a = 0.0, "delta2"_a = 0.0,
      "n_reps"_a = 10, "seed"_a = 1, "jobs"_a = 1);
}
