#pragma once

#include <vector>

#include "factorreg/types.hpp"

namespace factorreg::whitenoise {

struct WhiteNoiseConfig {
  int N = 10;                  // maximum lag
  double alpha = 0.05;         // level of each test
  double epsilon_trim = 0.75;  // keep floor(eps T) components when p - m >= T
  Eigen::Index m_regressors = 0;
  /// The trailing m components are dropped when 0 < m <= small_m_fraction * p.
  double small_m_fraction = 0.1;
  int i_max = 30;

  void validate() const;
};

struct WhiteNoiseDecision {
  double statistic = 0.0;
  double critical_value = 0.0;
  bool reject = false;
  Eigen::Index d_i = 0;          // dimension after trimming, before whitening
  Eigen::Index d_whitened = 0;   // dimension after PCA whitening
  Eigen::Index K_effective = 0;  // N * d_whitened^2
};

/// Centers U, rotates onto its principal components and scales each
/// retained component (eigenvalue > 1e-10 * largest) to unit variance
/// (divisor T). The result has identity sample covariance.
Matrix pca_orthogonalize(const Matrix& u);

/// Lag-k Spearman matrix: entry (j, l) correlates component j over
/// t = k+1..T with component l over t = 1..T-k, average ranks on ties.
/// Constant columns give 0 entries and push DegenerateColumn onto
/// `warnings` when it is non-null.
Matrix rank_autocorr(const Matrix& u, int k, std::vector<Warning>* warnings = nullptr);

struct HdwnStatistic {
  double statistic = 0.0;
  Eigen::Index K_effective = 0;
};

/// max over lags 1..N and all entries of sqrt(T) |rank autocorrelation|.
HdwnStatistic hdwn_statistic(const Matrix& u, int N);

/// Level-alpha critical value of the maximum of K asymptotically
/// independent |N(0,1)| variables: solves exp(-2K(1 - Phi(q))) = 1 - alpha.
double gumbel_critical_value(Eigen::Index K_effective, double alpha);

/// Whitens `u` and compares its statistic with the critical value.
WhiteNoiseDecision test_white_noise(const Matrix& u, int N, double alpha);

struct FactorCountSelection {
  int rhat = 0;
  std::vector<WhiteNoiseDecision> decisions;
  std::vector<Warning> warnings;
  Eigen::Index tested_tail = 0;  // last component index (exclusive) entering the tests
};

/// Sequential selection of the number of factors. `ghat` holds the
/// eigenvectors of the lag-autocovariance matrix in descending order; the
/// i-th test asks whether components i..tail of ghat' e_t are white noise,
/// and the first non-rejection at i gives rhat = i - 1.
FactorCountSelection select_num_factors(const SeriesMatrix& e, const Matrix& ghat,
                                        const WhiteNoiseConfig& cfg);

}  // namespace factorreg::whitenoise
