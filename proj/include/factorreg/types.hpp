#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "factorreg/errors.hpp"

namespace factorreg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A T x d panel; row t is the observation at time t (time increases with
/// the row index). All entries must be finite and T >= 2.
class SeriesMatrix {
 public:
  SeriesMatrix() = default;
  explicit SeriesMatrix(Matrix values);

  const Matrix& values() const noexcept { return values_; }
  Eigen::Index T() const noexcept { return values_.rows(); }
  Eigen::Index dim() const noexcept { return values_.cols(); }

  /// Rows [begin, end) as a new panel.
  SeriesMatrix slice(Eigen::Index begin, Eigen::Index end) const;

 private:
  Matrix values_;
};

/// A p x k matrix with orthonormal columns (max-abs deviation of the Gram
/// matrix from the identity at most 1e-8). k == 0 is only reachable through
/// empty().
class OrthonormalBasis {
 public:
  OrthonormalBasis() = default;
  explicit OrthonormalBasis(Matrix matrix);

  static OrthonormalBasis empty(Eigen::Index p);
  /// Orthonormalizes the columns of a full-column-rank matrix (thin QR).
  static OrthonormalBasis from_span(const Matrix& h);

  const Matrix& matrix() const noexcept { return matrix_; }
  Eigen::Index p() const noexcept { return matrix_.rows(); }
  Eigen::Index k() const noexcept { return matrix_.cols(); }

  static constexpr double kTolerance = 1e-8;

 private:
  Matrix matrix_;
};

/// Non-fatal diagnostics attached to results.
enum class Warning {
  DegenerateGap,
  DegenerateColumn,
  CapReached,
  NonStationaryVar,
};

std::string to_string(Warning w);

}  // namespace factorreg
