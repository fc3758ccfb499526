#include "factorreg/factor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace factorreg::factor {
namespace {

void fix_signs(Matrix& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    Eigen::Index arg = 0;
    vectors.col(c).cwiseAbs().maxCoeff(&arg);
    if (vectors(arg, c) < 0.0) vectors.col(c) *= -1.0;
  }
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

AutocovarianceSet autocovariances(const SeriesMatrix& e, int k0) {
  const auto T = e.T();
  if (k0 < 1 || k0 > T - 2) {
    throw LagError("autocovariances: k0 must satisfy 1 <= k0 <= T-2 (k0=" + std::to_string(k0) +
                   ", T=" + std::to_string(T) + ")");
  }
  AutocovarianceSet acv;
  acv.k0 = k0;
  acv.mean = e.values().colwise().mean().transpose();
  const Matrix c = e.values().rowwise() - acv.mean.transpose();
  const double inv_t = 1.0 / static_cast<double>(T);
  acv.sigma.reserve(static_cast<std::size_t>(k0) + 1);
  for (int k = 0; k <= k0; ++k) {
    const auto n = T - k;
    // sum_{t=k+1}^{T} c_t c_{t-k}'
    acv.sigma.push_back((c.bottomRows(n).transpose() * c.topRows(n)) * inv_t);
  }
  return acv;
}

Matrix build_m(const AutocovarianceSet& acv) {
  if (acv.k0 < 1 || acv.sigma.size() != static_cast<std::size_t>(acv.k0) + 1) {
    throw LagError("build_m: autocovariance set needs k0 >= 1 and k0+1 matrices");
  }
  const auto p = acv.sigma[0].rows();
  Matrix m = Matrix::Zero(p, p);
  for (int k = 1; k <= acv.k0; ++k) {
    const Matrix& s = acv.sigma[static_cast<std::size_t>(k)];
    m.noalias() += s * s.transpose();
  }
  return symmetrized(m);
}

SymmetricEigen sorted_eigen(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("sorted_eigen: matrix must be square");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrized(m));
  if (solver.info() != Eigen::Success) throw LinAlgError("eigensolver failed");
  SymmetricEigen out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  fix_signs(out.vectors);
  return out;
}

EigenSplit eigen_split(const Matrix& m, int r) {
  const auto p = m.rows();
  if (r < 1 || r >= p) {
    throw DimensionError("eigen_split: need 1 <= r < p (r=" + std::to_string(r) +
                         ", p=" + std::to_string(p) + ")");
  }
  const SymmetricEigen eig = sorted_eigen(m);
  EigenSplit out{OrthonormalBasis(eig.vectors.leftCols(r)),
                 OrthonormalBasis(eig.vectors.rightCols(p - r)), eig.values, {}};
  const double scale = std::max(std::abs(eig.values(0)), std::numeric_limits<double>::min());
  if (std::abs(eig.values(r - 1) - eig.values(r)) < 1e-10 * std::max(scale, 1.0)) {
    out.warnings.push_back(Warning::DegenerateGap);
  }
  return out;
}

Matrix build_s(const AutocovarianceSet& acv, const OrthonormalBasis& u1hat) {
  if (acv.sigma.empty()) throw DimensionError("build_s: empty autocovariance set");
  const Matrix& sigma0 = acv.sigma[0];
  if (u1hat.p() != sigma0.rows()) throw DimensionError("build_s: U1hat must have p rows");
  const Matrix w = sigma0 * u1hat.matrix();
  return symmetrized(w * w.transpose());
}

int select_shat(const Vector& s_eigs, int d_u, double reference_scale) {
  const auto p = s_eigs.size();
  if (d_u < 1 || d_u > p - 1) {
    throw DimensionError("select_shat: need 1 <= d_u <= p-1 (d_u=" + std::to_string(d_u) + ")");
  }
  const Vector mu = s_eigs.cwiseMax(0.0);
  const double top = mu(0);
  if (!(top > 0.0) || top <= 1e-12 * reference_scale) {
    throw NoSignalError("select_shat: projected covariance has no signal");
  }
  int best = 1;
  double best_ratio = std::numeric_limits<double>::infinity();
  for (int j = 1; j <= d_u; ++j) {
    const double denom = mu(j - 1);
    const double ratio = denom <= 1e-12 * top ? 1.0 : mu(j) / denom;
    if (ratio < best_ratio) {
      best_ratio = ratio;
      best = j;
    }
  }
  return best;
}

ProjectionBasis build_u2(const Matrix& s, int shat, const OrthonormalBasis& a1hat) {
  const auto p = s.rows();
  const auto r = a1hat.k();
  if (a1hat.p() != p) throw DimensionError("build_u2: A1hat must have p rows");
  if (shat < 0 || shat >= p || p - shat < r || r < 1) {
    throw DimensionError("build_u2: need 0 <= shat < p, r >= 1 and p - shat >= r");
  }
  const SymmetricEigen eig = sorted_eigen(s);
  const Matrix u2star = eig.vectors.rightCols(p - shat);
  const Matrix v = u2star.transpose() * a1hat.matrix();  // (p-shat) x r
  // Leading eigenvectors of V V' are the left singular vectors of V.
  Eigen::JacobiSVD<Matrix> svd(v, Eigen::ComputeThinU);
  Matrix rhat = svd.matrixU();
  fix_signs(rhat);
  const double sigma_min = svd.singularValues()(r - 1);
  if (!(sigma_min > 1e-10)) {
    throw IllConditionedProjectionError(
        "build_u2: U2hat'A1hat is singular (sigma_min=" + std::to_string(sigma_min) + ")",
        sigma_min);
  }
  ProjectionBasis out{OrthonormalBasis(u2star), OrthonormalBasis(rhat), u2star * rhat, sigma_min};
  return out;
}

Matrix recover_factors(const SeriesMatrix& e, const Matrix& u2hat, const OrthonormalBasis& a1hat) {
  if (u2hat.rows() != e.dim() || a1hat.p() != e.dim() || u2hat.cols() != a1hat.k()) {
    throw DimensionError("recover_factors: shapes of E, U2hat and A1hat disagree");
  }
  const Matrix c = u2hat.transpose() * a1hat.matrix();
  Eigen::JacobiSVD<Matrix> svd(c);
  const double sigma_min = svd.singularValues()(c.cols() - 1);
  if (!(sigma_min > 1e-10)) {
    throw IllConditionedProjectionError(
        "recover_factors: U2hat'A1hat is singular (sigma_min=" + std::to_string(sigma_min) + ")",
        sigma_min);
  }
  // Rows: x_t' = e_t' U2hat C^{-T}.
  const Matrix projected = e.values() * u2hat;  // T x r
  return c.partialPivLu().solve(projected.transpose()).transpose();
}

FactorEstimate fit_factor_model(const SeriesMatrix& e, const FactorConfig& cfg) {
  const auto p = e.dim();
  if (p < 2) throw DimensionError("fit_factor_model: need p >= 2");
  const AutocovarianceSet acv = autocovariances(e, cfg.k0);
  const Matrix m = build_m(acv);
  const SymmetricEigen eig = sorted_eigen(m);

  FactorEstimate est;
  est.M_eigs = eig.values;
  est.frame = eig.vectors;

  int r = 0;
  if (cfg.r) {
    r = *cfg.r;
    if (r < 0 || r >= p) throw DimensionError("fit_factor_model: need 0 <= r < p");
  } else {
    whitenoise::FactorCountSelection sel = whitenoise::select_num_factors(e, eig.vectors, cfg.wn);
    r = sel.rhat;
    est.decisions = std::move(sel.decisions);
    est.warnings = std::move(sel.warnings);
  }
  est.rhat = r;
  if (r == 0) {
    est.A1hat = OrthonormalBasis::empty(p);
    est.U1hat = OrthonormalBasis(eig.vectors);
    est.U2star = OrthonormalBasis(Matrix::Identity(p, p));
    est.Rhat = OrthonormalBasis::empty(p);
    est.U2hat = Matrix(p, 0);
    est.xhat = Matrix(e.T(), 0);
    return est;
  }
  if (r >= p) throw DimensionError("fit_factor_model: r must be < p");

  EigenSplit split = eigen_split(m, r);
  est.warnings.insert(est.warnings.end(), split.warnings.begin(), split.warnings.end());
  est.A1hat = split.A1hat;
  est.U1hat = split.U1hat;

  const Matrix s = build_s(acv, est.U1hat);
  est.S_eigs = sorted_eigen(s).values;
  const int d_u = std::clamp(cfg.d_u.value_or(static_cast<int>(p / 2)), 1, static_cast<int>(p - 1));
  const double sigma0_norm = acv.sigma[0].operatorNorm();
  try {
    est.shat = select_shat(est.S_eigs, d_u, sigma0_norm * sigma0_norm);
  } catch (const NoSignalError&) {
    est.shat = 0;
  }
  if (p - est.shat < r) {
    throw DimensionError("fit_factor_model: shat=" + std::to_string(est.shat) +
                         " leaves fewer than r directions");
  }
  ProjectionBasis u2 = build_u2(s, est.shat, est.A1hat);
  est.U2star = std::move(u2.U2star);
  est.Rhat = std::move(u2.Rhat);
  est.U2hat = std::move(u2.U2hat);
  est.sigma_min = u2.sigma_min;
  est.xhat = recover_factors(e, est.U2hat, est.A1hat);
  return est;
}

}  // namespace factorreg::factor
