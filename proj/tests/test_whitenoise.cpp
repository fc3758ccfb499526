#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "factorreg/factor.hpp"
#include "factorreg/whitenoise.hpp"
#include "run_checks.hpp"

using namespace factorreg;

TEST_CASE("PCA whitening gives identity covariance") {
  CounterRng rng(1);
  Matrix u = rng.normal_matrix(200, 5);
  u.col(1) += 3.0 * u.col(0);
  u.col(4) *= 10.0;
  const Matrix w = whitenoise::pca_orthogonalize(u);
  REQUIRE(w.cols() == 5);
  const Matrix centered = w.rowwise() - w.colwise().mean();
  const Matrix cov = centered.transpose() * centered / 200.0;
  CHECK((cov - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("PCA whitening of already white columns") {
  CounterRng rng(2);
  const Matrix u = rng.normal_matrix(1000, 3);
  const Matrix w = whitenoise::pca_orthogonalize(u);
  const Matrix uc = u.rowwise() - u.colwise().mean();
  Matrix corr = uc.transpose() * uc;
  const Vector sd = corr.diagonal().cwiseSqrt();
  corr = sd.cwiseInverse().asDiagonal() * corr * sd.cwiseInverse().asDiagonal();
  CHECK((corr - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 5.0 / std::sqrt(1000.0));
  CHECK(w.cols() == 3);
}

TEST_CASE("PCA whitening drops collinear and rejects constant input") {
  CounterRng rng(3);
  Matrix u = rng.normal_matrix(50, 4);
  u.col(3) = u.col(1);
  CHECK(whitenoise::pca_orthogonalize(u).cols() == 3);
  CHECK_THROWS_AS(whitenoise::pca_orthogonalize(Matrix::Constant(50, 3, 2.0)), DegenerateInputError);
  CHECK_THROWS_AS(whitenoise::pca_orthogonalize(Matrix::Random(2, 3)), DimensionError);
}

TEST_CASE("rank autocorrelation of monotone and copied series") {
  Matrix u(4, 1);
  u << 1, 2, 3, 4;
  CHECK(whitenoise::rank_autocorr(u, 1)(0, 0) == doctest::Approx(1.0));

  CounterRng rng(4);
  Matrix v = rng.normal_matrix(60, 2);
  for (Eigen::Index t = 1; t < 60; ++t) v(t, 1) = std::exp(v(t - 1, 0));
  CHECK(whitenoise::rank_autocorr(v, 1)(1, 0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(whitenoise::rank_autocorr(v, 59), LagError);
  CHECK_THROWS_AS(whitenoise::rank_autocorr(v, 0), LagError);
}

TEST_CASE("constant column gives zero entries and a warning") {
  CounterRng rng(5);
  Matrix u = rng.normal_matrix(30, 2);
  u.col(1).setConstant(1.0);
  std::vector<Warning> warnings;
  const Matrix g = whitenoise::rank_autocorr(u, 2, &warnings);
  CHECK(g.col(1).isZero(0.0));
  CHECK(g.row(1).isZero(0.0));
  CHECK(std::count(warnings.begin(), warnings.end(), Warning::DegenerateColumn) == 1);
}

TEST_CASE("iid rank autocorrelations are of order one over root T") {
  CounterRng rng(6);
  const Matrix g = whitenoise::rank_autocorr(rng.normal_matrix(4000, 4), 1);
  CHECK(g.cwiseAbs().maxCoeff() < 5.0 / std::sqrt(4000.0));
}

TEST_CASE("critical value solves the extreme-value equation") {
  const double q = whitenoise::gumbel_critical_value(1, 0.05);
  CHECK(q == doctest::Approx(testing::gumbel_bisection(1, 0.05)).epsilon(1e-10));
  CHECK(q == doctest::Approx(1.9488).epsilon(1e-4));
  CHECK(whitenoise::gumbel_critical_value(100, 0.05) > whitenoise::gumbel_critical_value(10, 0.05));
  CHECK_THROWS_AS(whitenoise::gumbel_critical_value(10, 0.0), ConfigError);
  CHECK_THROWS_AS(whitenoise::gumbel_critical_value(10, 1.0), ConfigError);
}

TEST_CASE("statistic law under the null for one series and one lag") {
  // sqrt(T) |rho_1| is asymptotically |N(0,1)|, whose 95th percentile is 1.95996.
  const CounterRng root(7);
  std::vector<double> stats;
  for (int i = 0; i < 2000; ++i) {
    CounterRng rng = root.split(static_cast<std::uint64_t>(i));
    stats.push_back(whitenoise::hdwn_statistic(rng.normal_matrix(2500, 1), 1).statistic);
  }
  std::sort(stats.begin(), stats.end());
  const double q95 = stats[static_cast<std::size_t>(0.95 * 2000) - 1];
  CHECK(std::abs(q95 - 1.959964) <= 0.15);
}

TEST_CASE("K_effective counts lags and whitened pairs") {
  CounterRng rng(8);
  const auto stat = whitenoise::hdwn_statistic(rng.normal_matrix(100, 3), 4);
  CHECK(stat.K_effective == 4 * 9);
  CHECK_THROWS_AS(whitenoise::hdwn_statistic(rng.normal_matrix(10, 2), 9), LagError);
}

TEST_CASE("white-noise panel selects zero factors") {
  const CounterRng root(9);
  int zeros = 0;
  for (int i = 0; i < 100; ++i) {
    CounterRng rng = root.split(static_cast<std::uint64_t>(i));
    const SeriesMatrix e(rng.normal_matrix(300, 10));
    const auto acv = factor::autocovariances(e, 2);
    const auto sel = whitenoise::select_num_factors(e, factor::sorted_eigen(factor::build_m(acv)).vectors, {});
    if (sel.rhat == 0) ++zeros;
  }
  CHECK(zeros >= 85);
}

TEST_CASE("tail trimming rules") {
  CounterRng rng(10);
  const SeriesMatrix e(rng.normal_matrix(40, 30));
  const Matrix g = Matrix::Identity(30, 30);
  whitenoise::WhiteNoiseConfig cfg;
  cfg.m_regressors = 3;  // 3 <= 0.1 * 30 drops three components
  CHECK(whitenoise::select_num_factors(e, g, cfg).tested_tail == 27);
  cfg.m_regressors = 4;
  CHECK(whitenoise::select_num_factors(e, g, cfg).tested_tail == 30);

  const SeriesMatrix wide(rng.normal_matrix(20, 30));
  cfg.m_regressors = 0;
  CHECK(whitenoise::select_num_factors(wide, g, cfg).tested_tail == 15);  // floor(0.75 * 20)

  const SeriesMatrix narrow(rng.normal_matrix(50, 2));
  cfg.m_regressors = 1;
  cfg.small_m_fraction = 0.5;
  CHECK_THROWS_AS(whitenoise::select_num_factors(narrow, Matrix::Identity(2, 2), cfg), DimensionError);
}

TEST_CASE("cap on the sequential search") {
  // Every component is a strongly autocorrelated AR(1) process.
  CounterRng rng(11);
  Matrix e = rng.normal_matrix(400, 6);
  for (Eigen::Index t = 1; t < 400; ++t) e.row(t) += 0.9 * e.row(t - 1);
  whitenoise::WhiteNoiseConfig cfg;
  cfg.i_max = 2;
  const auto sel = whitenoise::select_num_factors(SeriesMatrix(e), Matrix::Identity(6, 6), cfg);
  CHECK(sel.rhat == 2);
  CHECK(std::count(sel.warnings.begin(), sel.warnings.end(), Warning::CapReached) == 1);
  for (const auto& d : sel.decisions) CHECK(d.reject == (d.statistic > d.critical_value));
}

TEST_CASE("whitenoise properties") { testing::require_all(testing::whitenoise_properties()); }
