#pragma once

#include <vector>

#include "factorreg/types.hpp"

namespace factorreg::regression {

enum class Mode { OLS, LASSO };

/// How the per-series Lasso penalty is chosen.
///   Fixed:  lambda = value
///   Theory: lambda = value * sqrt(log(p m) / T)
///   Bic:    minimum-BIC point of a log-spaced path from lambda_max down
struct LambdaRule {
  enum class Kind { Fixed, Theory, Bic };
  Kind kind = Kind::Theory;
  double value = 1.0;

  static LambdaRule fixed(double lambda) { return {Kind::Fixed, lambda}; }
  static LambdaRule theory(double c = 1.0) { return {Kind::Theory, c}; }
  static LambdaRule bic() { return {Kind::Bic, 0.0}; }
};

struct RegressionConfig {
  Mode mode = Mode::OLS;
  LambdaRule lambda_rule = LambdaRule::theory(1.0);
  bool refit = true;
  /// OLS only. The Lasso always centers and reports an intercept.
  bool intercept = false;
  int max_iter = 100000;
  double tol = 1e-10;
  int path_length = 50;
  double path_min_ratio = 1e-3;

  void validate() const;
};

struct RegressionFit {
  Matrix Bhat;        // p x m
  Vector intercept;   // p, zero unless an intercept was fitted
  SeriesMatrix residuals;
  std::vector<std::vector<Eigen::Index>> supports;
  Vector lambdas;     // p; zeros for OLS
};

RegressionFit fit_ols(const SeriesMatrix& y, const SeriesMatrix& z, bool intercept = false);
RegressionFit fit_lasso(const SeriesMatrix& y, const SeriesMatrix& z, const RegressionConfig& cfg);
/// Dispatches on cfg.mode.
RegressionFit fit(const SeriesMatrix& y, const SeriesMatrix& z, const RegressionConfig& cfg);

/// Y - 1 intercept' - Z Bhat'.
SeriesMatrix residuals(const RegressionFit& fit, const SeriesMatrix& y, const SeriesMatrix& z);

/// Penalty implied by the theory rule for a p x m problem with T samples.
double theory_lambda(double c, Eigen::Index p, Eigen::Index m, Eigen::Index T);

/// Problem data of one Lasso row on the standardized scale:
///   minimize  yy - 2 b'xy + b' gram b + lambda ||b||_1
/// which equals (1/T)||y - X b||^2 + lambda ||b||_1 with gram = X'X/T,
/// xy = X'y/T, yy = y'y/T.
struct LassoProblem {
  Matrix gram;
  Vector xy;
  double yy = 0.0;

  double objective(const Vector& beta, double lambda) const;
  /// Largest lambda with a nonzero solution: max_j |2 xy_j|.
  double lambda_max() const;
};

struct LassoSolution {
  Vector beta;
  /// (1/T) X'r at the solution; the KKT condition is |2 grad_j| <= lambda.
  Vector grad;
  std::vector<double> objective_trace;  // one entry per completed sweep
  int sweeps = 0;
};

/// Cyclic coordinate descent with covariance updates. Throws
/// ConvergenceError (carrying the last iterate) after max_iter sweeps.
LassoSolution solve_lasso(const LassoProblem& problem, double lambda, const Vector& warm_start,
                          int max_iter, double tol);

/// Builds a standardized problem from raw columns: X is centered and scaled
/// to unit variance (divisor T), y is centered. Zero-variance columns of X
/// are reported in `dropped` and zeroed in the problem.
struct StandardizedDesign {
  Matrix x;          // T x m standardized
  Vector mean;       // m
  Vector scale;      // m, 0 for dropped columns
  std::vector<Eigen::Index> kept;
};
StandardizedDesign standardize(const Matrix& z);

}  // namespace factorreg::regression
