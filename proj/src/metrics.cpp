#include "factorreg/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace factorreg::metrics {
namespace {

double clamped_root(double radicand) { return std::sqrt(std::clamp(radicand, 0.0, 1.0)); }

// Projector onto span(h); rejects rank deficiency relative to sigma_max.
Matrix projector(const Matrix& h, const char* name) {
  if (h.cols() < 1 || h.cols() > h.rows()) {
    throw RankError(std::string(name) + " must have 1 <= columns <= rows");
  }
  Eigen::JacobiSVD<Matrix> svd(h, Eigen::ComputeThinU);
  const Vector& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= 1e-10 * sv(0)) {
    throw RankError(std::string(name) + " is rank deficient");
  }
  // H (H'H)^{-1} H' equals U U' for the thin left singular vectors.
  const Matrix& u = svd.matrixU();
  return u * u.transpose();
}

}  // namespace

double distance_d(const OrthonormalBasis& h1, const OrthonormalBasis& h2) {
  if (h1.p() != h2.p() || h1.k() != h2.k()) {
    throw DimensionError("distance_d: bases must share p and column count");
  }
  if (h1.k() == 0) throw DimensionError("distance_d: empty basis");
  // tr(H1 H1' H2 H2') = ||H1' H2||_F^2
  const double tr = (h1.matrix().transpose() * h2.matrix()).squaredNorm();
  return clamped_root(1.0 - tr / static_cast<double>(h1.k()));
}

double distance_dbar(const Matrix& h1, const Matrix& h2) {
  if (h1.rows() != h2.rows()) {
    throw DimensionError("distance_dbar: inputs must share p");
  }
  const Matrix p1 = projector(h1, "H1");
  const Matrix p2 = projector(h2, "H2");
  const double tr = (p1.cwiseProduct(p2)).sum();  // tr(P1 P2), both symmetric
  const auto r = std::max(h1.cols(), h2.cols());
  return clamped_root(1.0 - tr / static_cast<double>(r));
}

double factor_rmse(const Matrix& ahat, const Matrix& xhat, const Matrix& l1, const Matrix& f) {
  if (xhat.rows() != f.rows()) throw DimensionError("factor_rmse: T mismatch");
  if (ahat.cols() != xhat.cols() || l1.cols() != f.cols() || ahat.rows() != l1.rows()) {
    throw DimensionError("factor_rmse: loading/factor shapes disagree");
  }
  const Matrix diff = xhat * ahat.transpose() - f * l1.transpose();
  const double denom = static_cast<double>(f.rows()) * static_cast<double>(l1.rows());
  return std::sqrt(diff.squaredNorm() / denom);
}

double factor_rmse(const Matrix& ahat, const SeriesMatrix& xhat, const Matrix& l1,
                   const SeriesMatrix& f) {
  return factor_rmse(ahat, xhat.values(), l1, f.values());
}

double forecast_error(const Matrix& yhat, const Matrix& y) {
  if (yhat.rows() != y.rows() || yhat.cols() != y.cols()) {
    throw DimensionError("forecast_error: shape mismatch");
  }
  if (y.rows() == 0 || y.cols() == 0) throw DimensionError("forecast_error: empty input");
  const double sqrt_p = std::sqrt(static_cast<double>(y.cols()));
  return (yhat - y).rowwise().norm().sum() / sqrt_p / static_cast<double>(y.rows());
}

}  // namespace factorreg::metrics
