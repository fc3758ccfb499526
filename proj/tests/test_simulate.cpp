#include <algorithm>
#include <cmath>
#include <limits>

#include <doctest.h>

#include "factorreg/simulate.hpp"
#include "run_checks.hpp"

using namespace factorreg;

TEST_CASE("loadings carry the prescribed singular values") {
  const auto l = simulate::make_loadings(100, 3, 3, 0.0, 0.4, 2.0, 5);
  const Eigen::JacobiSVD<Matrix> s1(l.L1);
  for (Eigen::Index j = 0; j < 3; ++j) CHECK(s1.singularValues()(j) == doctest::Approx(10.0).epsilon(1e-10));

  const Eigen::JacobiSVD<Matrix> s2(l.L2);
  const Vector sv = s2.singularValues();
  REQUIRE(sv.size() == 97);
  for (Eigen::Index j = 0; j < 3; ++j) CHECK(sv(j) == doctest::Approx(std::pow(100.0, 0.3)).epsilon(1e-10));
  for (Eigen::Index j = 3; j < 97; ++j) CHECK(sv(j) == doctest::Approx(2.0).epsilon(1e-10));

  CHECK((l.L1.transpose() * l.L2).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK_THROWS_AS(simulate::make_loadings(6, 3, 3, 0.0, 0.0, 2.0, 5), ConfigError);
}

TEST_CASE("coefficient patterns of the two designs") {
  simulate::SimScenario sc;
  sc.p = 30;
  const auto dense = simulate::make_design(sc);
  CHECK(dense.B.cwiseAbs().minCoeff() >= 1.0);
  CHECK(dense.B.cwiseAbs().maxCoeff() <= 2.0);

  sc.design = simulate::Design::Example2;
  sc.m = 40;
  const auto sparse = simulate::make_design(sc);
  for (Eigen::Index i = 0; i < sc.p; ++i) {
    int nonzero = 0;
    for (Eigen::Index j = 0; j < sc.m; ++j) {
      const double v = std::abs(sparse.B(i, j));
      if (v != 0.0) {
        ++nonzero;
        CHECK(v >= 1.0);
        CHECK(v <= 2.0);
      }
    }
    CHECK(nonzero == 5);
  }
  for (Eigen::Index j = 0; j < sc.m; ++j) {
    CHECK(sparse.phi1(j) >= 0.5);
    CHECK(sparse.phi1(j) <= 0.9);
  }
}

TEST_CASE("regressor autocorrelation matches its AR coefficient") {
  simulate::SimScenario sc;
  sc.T = 5000;
  const auto g = simulate::simulate(sc);
  for (Eigen::Index j = 0; j < sc.m; ++j) {
    const Vector x = g.z.col(j).array() - g.z.col(j).mean();
    const double rho = x.tail(sc.T - 1).dot(x.head(sc.T - 1)) / x.squaredNorm();
    CHECK(std::abs(rho - g.Phi1(j, j)) <= 0.1);
  }
}

TEST_CASE("scenario validation") {
  simulate::SimScenario sc;
  sc.p = 6;
  CHECK_THROWS_AS(sc.validate(), ConfigError);
  sc = {};
  sc.delta1 = 1.0;
  CHECK_THROWS_AS(sc.validate(), ConfigError);
  sc = {};
  sc.m = 300;
  CHECK_THROWS_AS(sc.validate(), ConfigError);
  sc = {};
  sc.design = simulate::Design::Example2;
  sc.m = 3;
  CHECK_THROWS_AS(sc.validate(), ConfigError);
  CHECK_THROWS_AS(simulate::simulate_example1(sc), ConfigError);
  CHECK_THROWS_AS(simulate::design_from_string("example3"), ConfigError);
}

TEST_CASE("quartiles interpolate linearly and skip NaN") {
  const auto q = simulate::quartiles({4.0, 1.0, std::numeric_limits<double>::quiet_NaN(), 3.0, 2.0});
  CHECK(q.n == 4);
  CHECK(q.q1 == doctest::Approx(1.75));
  CHECK(q.median == doctest::Approx(2.5));
  CHECK(q.q3 == doctest::Approx(3.25));
}

TEST_CASE("one replicate equals a direct run") {
  simulate::SimScenario sc;
  sc.seed = 42;
  PipelineConfig cfg;
  const auto rep = simulate::replicate(sc, 1, cfg);
  REQUIRE(rep.records.size() == 1);
  sc.seed = replicate_seed(42, 0);
  const auto truth = simulate::simulate(sc);
  const auto fit = fit_pipeline(SeriesMatrix(truth.y), SeriesMatrix(truth.z), cfg);
  CHECK(rep.records[0].b_error == (fit.regression.Bhat - truth.B).norm());
  CHECK(rep.records[0].rhat == fit.factor.rhat);
  CHECK(rep.prob_rhat_correct == (fit.factor.rhat == 3 ? 1.0 : 0.0));
}

TEST_CASE("factor eigenvalues grow linearly in p") {
  // The factor path depends on the seed only, so the factor part of the
  // covariance scales exactly with p.
  double top[2];
  for (int k = 0; k < 2; ++k) {
    simulate::SimScenario sc;
    sc.p = k == 0 ? 50 : 200;
    sc.T = 2000;
    const auto g = simulate::simulate(sc);
    const Matrix eta = g.y - g.z * g.B.transpose();
    const Matrix c = eta.rowwise() - eta.colwise().mean();
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(c.transpose() * c / 2000.0);
    top[k] = eig.eigenvalues()(sc.p - 1);
  }
  CHECK(top[1] / top[0] == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("replicate CSV has one row per report") {
  simulate::SimScenario sc;
  const auto rep = simulate::replicate(sc, 2, simulate::default_pipeline(sc.design), simulate::kMetricBError);
  const std::string csv = simulate::reports_to_csv({rep, rep});
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("simulate properties") { testing::require_all(testing::simulate_properties()); }
