#pragma once

#include <optional>
#include <vector>

#include "factorreg/types.hpp"
#include "factorreg/whitenoise.hpp"

namespace factorreg::factor {

/// Lagged sample autocovariances of a residual panel. sigma[k] is the lag-k
/// matrix for k = 0..k0, all with divisor T around the full-sample mean.
struct AutocovarianceSet {
  int k0 = 0;
  std::vector<Matrix> sigma;
  Vector mean;
};

AutocovarianceSet autocovariances(const SeriesMatrix& e, int k0);

/// Sum over k = 1..k0 of sigma[k] sigma[k]'.
Matrix build_m(const AutocovarianceSet& acv);

/// Eigenvalues (descending) and matching eigenvectors of a symmetric
/// matrix. Each eigenvector is signed so its largest-magnitude entry is
/// positive.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;
};
SymmetricEigen sorted_eigen(const Matrix& m);

struct EigenSplit {
  OrthonormalBasis A1hat;  // leading r eigenvectors
  OrthonormalBasis U1hat;  // trailing p - r
  Vector eigs;             // descending
  std::vector<Warning> warnings;
};

/// Splits the eigenvectors of (M + M')/2 into the leading r and trailing
/// p - r. Flags DegenerateGap when eig_r and eig_{r+1} coincide.
EigenSplit eigen_split(const Matrix& m, int r);

/// sigma[0] U1 U1' sigma[0].
Matrix build_s(const AutocovarianceSet& acv, const OrthonormalBasis& u1hat);

/// Number of diverging noise directions: the j in 1..d_u minimizing
/// mu_{j+1} / mu_j (smallest j on ties). Ratios whose denominator is at or
/// below 1e-12 mu_1 count as 1. Throws NoSignalError when mu_1 is at or
/// below 1e-12 * reference_scale (or is zero).
int select_shat(const Vector& s_eigs, int d_u, double reference_scale = 0.0);

struct ProjectionBasis {
  OrthonormalBasis U2star;  // p x (p - shat), smallest eigenvalues of S
  OrthonormalBasis Rhat;    // (p - shat) x r
  Matrix U2hat;             // U2star * Rhat
  double sigma_min = 0.0;   // smallest singular value of U2hat' A1hat
};

/// Throws IllConditionedProjectionError when U2hat' A1hat is numerically
/// singular (smallest singular value <= 1e-10).
ProjectionBasis build_u2(const Matrix& s, int shat, const OrthonormalBasis& a1hat);

/// x_t = (U2hat' A1hat)^{-1} U2hat' e_t for every row of e.
Matrix recover_factors(const SeriesMatrix& e, const Matrix& u2hat, const OrthonormalBasis& a1hat);

struct FactorConfig {
  int k0 = 2;
  std::optional<int> r;    // nullopt selects r by sequential white-noise tests
  std::optional<int> d_u;  // nullopt uses floor(p / 2)
  whitenoise::WhiteNoiseConfig wn;
};

struct FactorEstimate {
  OrthonormalBasis A1hat;
  OrthonormalBasis U1hat;
  Vector M_eigs;
  Matrix frame;  // [A1hat U1hat]
  int shat = 0;
  Vector S_eigs;
  OrthonormalBasis U2star;
  OrthonormalBasis Rhat;
  Matrix U2hat;
  Matrix xhat;  // T x rhat
  int rhat = 0;
  double sigma_min = 0.0;
  std::vector<whitenoise::WhiteNoiseDecision> decisions;
  std::vector<Warning> warnings;
};

/// Full second stage: autocovariances, M, factor count, eigen split,
/// projected PCA, noise rank, U2 construction and factor recovery. When
/// rhat is 0 the factor fields are empty. When S carries no signal (mu_1 <=
/// 1e-12 ||sigma[0]||_2^2) shat is 0 and U2star spans the whole space.
FactorEstimate fit_factor_model(const SeriesMatrix& e, const FactorConfig& cfg);

}  // namespace factorreg::factor
