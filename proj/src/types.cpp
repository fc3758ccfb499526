#include "factorreg/types.hpp"

#include <cmath>

namespace factorreg {

SeriesMatrix::SeriesMatrix(Matrix values) : values_(std::move(values)) {
  if (values_.rows() < 2) {
    throw DimensionError("SeriesMatrix needs at least 2 time points, got " +
                         std::to_string(values_.rows()));
  }
  if (!values_.allFinite()) {
    throw DimensionError("SeriesMatrix contains non-finite entries");
  }
}

SeriesMatrix SeriesMatrix::slice(Eigen::Index begin, Eigen::Index end) const {
  if (begin < 0 || end > T() || end - begin < 2) {
    throw DimensionError("invalid SeriesMatrix slice");
  }
  return SeriesMatrix(values_.middleRows(begin, end - begin));
}

OrthonormalBasis::OrthonormalBasis(Matrix matrix) : matrix_(std::move(matrix)) {
  const auto k = matrix_.cols();
  if (k < 1 || k > matrix_.rows()) {
    throw DimensionError("OrthonormalBasis needs 1 <= k <= p");
  }
  const Matrix gram = matrix_.transpose() * matrix_;
  const double dev = (gram - Matrix::Identity(k, k)).cwiseAbs().maxCoeff();
  if (!(dev <= kTolerance)) {
    throw DimensionError("columns are not orthonormal (max deviation " +
                         std::to_string(dev) + ")");
  }
}

OrthonormalBasis OrthonormalBasis::empty(Eigen::Index p) {
  OrthonormalBasis b;
  b.matrix_ = Matrix(p, 0);
  return b;
}

OrthonormalBasis OrthonormalBasis::from_span(const Matrix& h) {
  if (h.cols() < 1 || h.cols() > h.rows()) {
    throw DimensionError("from_span needs 1 <= k <= p");
  }
  Eigen::HouseholderQR<Matrix> qr(h);
  const Matrix r = qr.matrixQR().topRows(h.cols()).triangularView<Eigen::Upper>();
  const double scale = r.diagonal().cwiseAbs().maxCoeff();
  if (r.diagonal().cwiseAbs().minCoeff() <= 1e-10 * scale) {
    throw RankError("from_span: input is rank deficient");
  }
  Matrix q = qr.householderQ() * Matrix::Identity(h.rows(), h.cols());
  return OrthonormalBasis(std::move(q));
}

std::string to_string(Warning w) {
  switch (w) {
    case Warning::DegenerateGap:
      return "DegenerateGapWarning";
    case Warning::DegenerateColumn:
      return "DegenerateColumnWarning";
    case Warning::CapReached:
      return "CapReachedWarning";
    case Warning::NonStationaryVar:
      return "NonStationaryVarWarning";
  }
  return "UnknownWarning";
}

}  // namespace factorreg
