#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "factorreg/factor.hpp"
#include "factorreg/metrics.hpp"
#include "factorreg/simulate.hpp"
#include "run_checks.hpp"

using namespace factorreg;
using Eigen::Vector3d;

TEST_CASE("autocovariances of a constant series vanish") {
  const auto acv = factor::autocovariances(SeriesMatrix(Matrix::Constant(8, 2, 3.5)), 3);
  REQUIRE(acv.sigma.size() == 4);
  for (const auto& s : acv.sigma) CHECK(s.isZero(0.0));
}

TEST_CASE("autocovariances of a hand dataset") {
  Matrix e(4, 2);
  e << 1, 2, -1, 0, 3, 1, 1, -3;
  const auto acv = factor::autocovariances(SeriesMatrix(e), 2);
  for (int k = 0; k <= 2; ++k) {
    CHECK((acv.sigma[static_cast<std::size_t>(k)] - testing::acov_double_loop(e, k)).cwiseAbs().maxCoeff() <=
          1e-14);
  }
  // Lag 1, entry (0, 0): centered x = (0, -2, 2, 0), sum x_t x_{t-1} / 4.
  CHECK(acv.sigma[1](0, 0) == doctest::Approx((0.0 - 4.0 + 0.0) / 4.0));
}

TEST_CASE("autocovariance lag range") {
  const SeriesMatrix e(Matrix::Random(5, 2));
  CHECK_THROWS_AS(factor::autocovariances(e, 0), LagError);
  CHECK_THROWS_AS(factor::autocovariances(e, 4), LagError);
  CHECK_NOTHROW(factor::autocovariances(e, 3));
}

TEST_CASE("white-noise autocovariances are small") {
  const CounterRng root(9);
  int inside = 0;
  for (int i = 0; i < 100; ++i) {
    CounterRng rng = root.split(static_cast<std::uint64_t>(i));
    const auto acv = factor::autocovariances(SeriesMatrix(rng.normal_matrix(5000, 3)), 1);
    if (acv.sigma[1].cwiseAbs().maxCoeff() < 5.0 * std::sqrt(1.0 / 5000.0)) ++inside;
    if (i == 0) CHECK(factor::build_m(acv).operatorNorm() < 10.0 * 3.0 / 5000.0);
  }
  CHECK(inside >= 95);
}

TEST_CASE("eigen_split on a diagonal matrix") {
  Matrix m = Vector3d(3, 2, 1).asDiagonal();
  const auto split = factor::eigen_split(m, 1);
  CHECK(split.eigs(0) == doctest::Approx(3.0));
  CHECK(split.eigs(2) == doctest::Approx(1.0));
  CHECK((split.A1hat.matrix() - Vector3d(1, 0, 0)).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(split.U1hat.k() == 2);
  CHECK(split.warnings.empty());
  CHECK_THROWS_AS(factor::eigen_split(m, 3), DimensionError);
}

TEST_CASE("eigen_split flags a degenerate gap") {
  const auto split = factor::eigen_split(Matrix::Identity(4, 4), 1);
  CHECK(std::count(split.warnings.begin(), split.warnings.end(), Warning::DegenerateGap) == 1);
  CHECK(split.A1hat.k() == 1);
  CHECK(split.U1hat.k() == 3);
}

TEST_CASE("sorted_eigen reconstructs a symmetric matrix") {
  CounterRng rng(10);
  const Matrix a = rng.normal_matrix(6, 6);
  const Matrix m = a + a.transpose();
  const auto eig = factor::sorted_eigen(m);
  const Matrix back = eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
  CHECK((back - m).cwiseAbs().maxCoeff() < 1e-8);
  for (Eigen::Index j = 0; j < 6; ++j) {
    Eigen::Index arg = 0;
    eig.vectors.col(j).cwiseAbs().maxCoeff(&arg);
    CHECK(eig.vectors(arg, j) > 0.0);
    if (j > 0) CHECK(eig.values(j) <= eig.values(j - 1));
  }
}

TEST_CASE("build_s vanishes when U1 spans the kernel of sigma0") {
  factor::AutocovarianceSet acv;
  acv.k0 = 1;
  acv.sigma = {Vector3d(2, 0, 0).asDiagonal(), Matrix::Zero(3, 3)};
  acv.mean = Vector::Zero(3);
  const Matrix u1 = Matrix::Identity(3, 3).rightCols(2);
  CHECK(factor::build_s(acv, OrthonormalBasis(u1)).isZero(0.0));
}

TEST_CASE("population model: projected PCA isolates the strong noise direction") {
  // eta = L1 f + L2 eps with L1 = 3 q1, L2 = [5 q2, q3, q4] in a rotated frame.
  CounterRng rng(11);
  const Matrix q = testing::random_orthonormal(rng, 4, 4);
  const Matrix l1 = 3.0 * q.col(0);
  Matrix l2(4, 3);
  l2 << 5.0 * q.col(1), q.col(2), q.col(3);
  const double var_f = 1.0 / (1.0 - 0.7 * 0.7);
  factor::AutocovarianceSet acv;
  acv.k0 = 1;
  acv.sigma = {var_f * l1 * l1.transpose() + l2 * l2.transpose(), 0.7 * var_f * l1 * l1.transpose()};
  acv.mean = Vector::Zero(4);

  const auto split = factor::eigen_split(factor::build_m(acv), 1);
  CHECK(metrics::distance_d(split.A1hat, OrthonormalBasis(q.col(0))) < 1e-7);
  const Matrix s = factor::build_s(acv, split.U1hat);
  CHECK((s * q.col(0)).norm() < 1e-10);
  const auto s_eigs = factor::sorted_eigen(s).values;
  CHECK(factor::select_shat(s_eigs, 2) == 1);
  const auto u2 = factor::build_u2(s, 1, split.A1hat);
  CHECK(u2.sigma_min == doctest::Approx(1.0));
  CHECK(metrics::distance_dbar(u2.U2hat, q.col(0)) < 1e-7);
}

TEST_CASE("select_shat examples and errors") {
  Vector gap(5);
  gap << 100, 90, 1, 0.9, 0.8;
  CHECK(factor::select_shat(gap, 4) == 2);
  CHECK(factor::select_shat(Vector::Constant(4, 5.0), 3) == 1);
  CHECK_THROWS_AS(factor::select_shat(Vector::Zero(4), 3), NoSignalError);
  CHECK_THROWS_AS(factor::select_shat(gap, 5), DimensionError);
}

TEST_CASE("build_u2 with no spikes aligns with A1hat") {
  CounterRng rng(12);
  const Matrix q = testing::random_orthonormal(rng, 4, 4);
  const OrthonormalBasis a1(q.col(0));
  const Matrix s = 1e-3 * (q.rightCols(3) * q.rightCols(3).transpose());
  const auto u2 = factor::build_u2(s, 0, a1);
  CHECK(u2.U2star.k() == 4);
  const Matrix c = u2.U2hat.transpose() * a1.matrix();
  CHECK(std::abs(c(0, 0)) == doctest::Approx(1.0));
}

TEST_CASE("build_u2 on an orthogonal design and on a degenerate one") {
  CounterRng rng(13);
  const Matrix q = testing::random_orthonormal(rng, 6, 6);
  Matrix s = 50.0 * q.col(1) * q.col(1).transpose() + 0.5 * q.rightCols(4) * q.rightCols(4).transpose();
  const auto good = factor::build_u2(s, 1, OrthonormalBasis(q.col(0)));
  CHECK(good.sigma_min >= 0.9);

  s = 50.0 * q.col(0) * q.col(0).transpose() + 0.5 * q.rightCols(5) * q.rightCols(5).transpose();
  CHECK_THROWS_AS(factor::build_u2(s, 1, OrthonormalBasis(q.col(0))), IllConditionedProjectionError);
}

TEST_CASE("recover_factors inverts exactly") {
  CounterRng rng(14);
  const Matrix a = testing::random_orthonormal(rng, 5, 2);
  const Matrix x = rng.normal_matrix(7, 2);
  const Matrix e = x * a.transpose();
  const Matrix xhat = factor::recover_factors(SeriesMatrix(e), a, OrthonormalBasis(a));
  CHECK((xhat - x).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("recover_factors hand instance with p = 3, r = 1") {
  const Matrix a = Vector3d(1, 0, 0);
  const Matrix u2 = Vector3d(0.6, 0.8, 0);
  Matrix e(2, 3);
  e << 1, 2, 3, -1, 0.5, 4;
  const Matrix xhat = factor::recover_factors(SeriesMatrix(e), u2, OrthonormalBasis(a));
  // x_t = (u2' e_t) / (u2' a) = (0.6 e1 + 0.8 e2) / 0.6.
  CHECK(xhat(0, 0) == doctest::Approx((0.6 + 1.6) / 0.6));
  CHECK(xhat(1, 0) == doctest::Approx((-0.6 + 0.4) / 0.6));
}

TEST_CASE("fit_factor_model with r = 0 returns empty factors") {
  factor::FactorConfig cfg;
  cfg.r = 0;
  const auto est = factor::fit_factor_model(SeriesMatrix(Matrix::Random(30, 4)), cfg);
  CHECK(est.rhat == 0);
  CHECK(est.xhat.cols() == 0);
  CHECK(est.A1hat.k() == 0);
}

TEST_CASE("factor RMSE falls from T = 300 to T = 1500") {
  simulate::SimScenario sc;
  PipelineConfig cfg;
  cfg.factor.r = 3;
  int better = 0;
  for (int i = 0; i < 50; ++i) {
    double rmse[2];
    for (int j = 0; j < 2; ++j) {
      sc.T = j == 0 ? 300 : 1500;
      sc.seed = replicate_seed(77, static_cast<std::uint64_t>(i));
      const auto truth = simulate::simulate(sc);
      const auto fit = fit_pipeline(SeriesMatrix(truth.y), SeriesMatrix(truth.z), cfg);
      rmse[j] = metrics::factor_rmse(fit.factor.A1hat.matrix(), fit.factor.xhat, truth.L1, truth.f);
    }
    if (rmse[1] < rmse[0]) ++better;
  }
  CHECK(better >= 45);
}

TEST_CASE("noise rank is recovered at p = 100, T = 1000") {
  simulate::SimScenario sc;
  sc.p = 100;
  sc.T = 1000;
  PipelineConfig cfg;
  cfg.factor.r = 3;
  int hits = 0;
  for (int i = 0; i < 100; ++i) {
    sc.seed = replicate_seed(91, static_cast<std::uint64_t>(i));
    const auto truth = simulate::simulate(sc);
    if (fit_pipeline(SeriesMatrix(truth.y), SeriesMatrix(truth.z), cfg).factor.shat == 3) ++hits;
  }
  CHECK(hits >= 80);
}

TEST_CASE("factor properties") { testing::require_all(testing::factor_properties()); }
