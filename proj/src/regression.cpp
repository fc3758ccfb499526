#include "factorreg/regression.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace factorreg::regression {
namespace {

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

void check_shapes(const SeriesMatrix& y, const SeriesMatrix& z) {
  if (y.T() != z.T()) {
    throw DimensionError("Y has " + std::to_string(y.T()) + " rows but Z has " +
                         std::to_string(z.T()));
  }
}

// Least squares restricted to `cols` using centered second moments.
Vector restricted_ls(const Matrix& cov, const Vector& cov_y, const std::vector<Eigen::Index>& cols) {
  const auto k = static_cast<Eigen::Index>(cols.size());
  Vector b = Vector::Zero(k);
  if (k == 0) return b;
  Matrix sub(k, k);
  Vector rhs(k);
  for (Eigen::Index a = 0; a < k; ++a) {
    rhs(a) = cov_y(cols[a]);
    for (Eigen::Index c = 0; c < k; ++c) sub(a, c) = cov(cols[a], cols[c]);
  }
  Eigen::LDLT<Matrix> ldlt(sub);
  const Vector d = ldlt.vectorD();
  if (ldlt.info() == Eigen::Success && d.minCoeff() > 1e-12 * d.cwiseAbs().maxCoeff()) {
    return ldlt.solve(rhs);
  }
  return sub.completeOrthogonalDecomposition().solve(rhs);
}

}  // namespace

void RegressionConfig::validate() const {
  if (lambda_rule.kind == LambdaRule::Kind::Fixed && !(lambda_rule.value > 0.0)) {
    throw ConfigError("fixed lambda must be > 0");
  }
  if (lambda_rule.kind == LambdaRule::Kind::Theory && !(lambda_rule.value > 0.0)) {
    throw ConfigError("theory constant c must be > 0");
  }
  if (!(tol > 0.0)) throw ConfigError("tol must be > 0");
  if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
  if (path_length < 2) throw ConfigError("path_length must be >= 2");
  if (!(path_min_ratio > 0.0 && path_min_ratio < 1.0)) {
    throw ConfigError("path_min_ratio must lie in (0, 1)");
  }
}

double theory_lambda(double c, Eigen::Index p, Eigen::Index m, Eigen::Index T) {
  const double pm = static_cast<double>(p) * static_cast<double>(m);
  return c * std::sqrt(std::log(std::max(pm, 1.0)) / static_cast<double>(T));
}

double LassoProblem::objective(const Vector& beta, double lambda) const {
  return yy - 2.0 * beta.dot(xy) + beta.dot(gram * beta) + lambda * beta.lpNorm<1>();
}

double LassoProblem::lambda_max() const {
  return xy.size() == 0 ? 0.0 : 2.0 * xy.cwiseAbs().maxCoeff();
}

LassoSolution solve_lasso(const LassoProblem& problem, double lambda, const Vector& warm_start,
                          int max_iter, double tol) {
  const auto m = problem.xy.size();
  LassoSolution sol;
  sol.beta = warm_start.size() == m ? warm_start : Vector::Zero(m);
  sol.grad = problem.xy - problem.gram * sol.beta;
  if (m == 0) return sol;

  const double half_lambda = 0.5 * lambda;
  for (int sweep = 0; sweep < max_iter; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      const double gjj = problem.gram(j, j);
      if (gjj <= 0.0) continue;
      const double old = sol.beta(j);
      // Partial residual correlation with coordinate j removed.
      const double rho = sol.grad(j) + gjj * old;
      const double updated = soft_threshold(rho, half_lambda) / gjj;
      const double delta = updated - old;
      if (delta != 0.0) {
        sol.beta(j) = updated;
        sol.grad.noalias() -= problem.gram.col(j) * delta;
        max_change = std::max(max_change, std::abs(delta) * std::sqrt(gjj));
      }
    }
    ++sol.sweeps;
    // obj = yy - b'xy - b'grad + lambda |b|_1 using grad = xy - G b.
    sol.objective_trace.push_back(problem.yy - sol.beta.dot(problem.xy) -
                                  sol.beta.dot(sol.grad) + lambda * sol.beta.lpNorm<1>());
    if (max_change < tol) return sol;
  }
  throw ConvergenceError("coordinate descent did not converge in " + std::to_string(max_iter) +
                             " sweeps",
                         sol.beta);
}

StandardizedDesign standardize(const Matrix& z) {
  const double T = static_cast<double>(z.rows());
  StandardizedDesign d;
  d.mean = z.colwise().mean().transpose();
  d.x = z.rowwise() - d.mean.transpose();
  d.scale = Vector::Zero(z.cols());
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const double sd = std::sqrt(d.x.col(j).squaredNorm() / T);
    if (sd > 1e-12 * (1.0 + std::abs(d.mean(j)))) {
      d.scale(j) = sd;
      d.x.col(j) /= sd;
      d.kept.push_back(j);
    } else {
      d.x.col(j).setZero();
    }
  }
  return d;
}

RegressionFit fit_ols(const SeriesMatrix& y, const SeriesMatrix& z, bool intercept) {
  check_shapes(y, z);
  const auto T = z.T();
  const auto m = z.dim();
  const auto m_eff = m + (intercept ? 1 : 0);
  if (T <= m_eff) {
    throw InsufficientSamplesError("OLS needs T > m (T=" + std::to_string(T) +
                                   ", m=" + std::to_string(m_eff) + "); use LASSO mode");
  }
  Matrix design(T, m_eff);
  if (intercept) {
    design.col(0).setOnes();
    design.rightCols(m) = z.values();
  } else {
    design = z.values();
  }
  const double inv_t = 1.0 / static_cast<double>(T);
  const Matrix gram = (design.transpose() * design) * inv_t;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues()(0);
  const double hi = eig.eigenvalues()(m_eff - 1);
  if (!(lo > 0.0) || hi / lo >= 1e12) {
    throw SingularGramError("regressor Gram matrix is singular or ill-conditioned");
  }
  const Matrix cross = (design.transpose() * y.values()) * inv_t;  // m_eff x p
  const Matrix coef = gram.llt().solve(cross);

  RegressionFit fit;
  if (intercept) {
    fit.intercept = coef.row(0).transpose();
    fit.Bhat = coef.bottomRows(m).transpose();
  } else {
    fit.intercept = Vector::Zero(y.dim());
    fit.Bhat = coef.transpose();
  }
  std::vector<Eigen::Index> all(static_cast<std::size_t>(m));
  for (Eigen::Index j = 0; j < m; ++j) all[static_cast<std::size_t>(j)] = j;
  fit.supports.assign(static_cast<std::size_t>(y.dim()), all);
  fit.lambdas = Vector::Zero(y.dim());
  fit.residuals = residuals(fit, y, z);
  return fit;
}

RegressionFit fit_lasso(const SeriesMatrix& y, const SeriesMatrix& z, const RegressionConfig& cfg) {
  cfg.validate();
  check_shapes(y, z);
  const auto T = z.T();
  const auto m = z.dim();
  const auto p = y.dim();
  const double inv_t = 1.0 / static_cast<double>(T);

  const StandardizedDesign design = standardize(z.values());
  const auto mk = static_cast<Eigen::Index>(design.kept.size());
  Matrix xk(T, mk);
  for (Eigen::Index a = 0; a < mk; ++a) xk.col(a) = design.x.col(design.kept[a]);

  const Vector ybar = y.values().colwise().mean().transpose();
  const Matrix yc = y.values().rowwise() - ybar.transpose();
  const Matrix zc = z.values().rowwise() - design.mean.transpose();

  LassoProblem problem;
  problem.gram = (xk.transpose() * xk) * inv_t;
  const Matrix xy_all = (xk.transpose() * yc) * inv_t;  // mk x p
  const Matrix cov = (zc.transpose() * zc) * inv_t;      // original-scale second moments
  const Matrix cov_y = (zc.transpose() * yc) * inv_t;

  RegressionFit fit;
  fit.Bhat = Matrix::Zero(p, m);
  fit.intercept = Vector::Zero(p);
  fit.lambdas = Vector::Zero(p);
  fit.supports.resize(static_cast<std::size_t>(p));

  for (Eigen::Index i = 0; i < p; ++i) {
    problem.xy = xy_all.col(i);
    problem.yy = yc.col(i).squaredNorm() * inv_t;

    // Penalized solution on the standardized scale -> original-scale row.
    auto to_row = [&](const Vector& beta, std::vector<Eigen::Index>& support) {
      Vector row = Vector::Zero(m);
      support.clear();
      for (Eigen::Index a = 0; a < mk; ++a) {
        if (beta(a) != 0.0) {
          const auto j = design.kept[a];
          support.push_back(j);
          row(j) = beta(a) / design.scale(j);
        }
      }
      if (cfg.refit) {
        const Vector b = restricted_ls(cov, cov_y.col(i), support);
        row.setZero();
        for (std::size_t a = 0; a < support.size(); ++a) row(support[a]) = b(static_cast<Eigen::Index>(a));
      }
      return row;
    };

    double lambda = 0.0;
    Vector row;
    std::vector<Eigen::Index> support;
    if (cfg.lambda_rule.kind == LambdaRule::Kind::Bic) {
      const double lmax = std::max(problem.lambda_max(), 1e-300);
      Vector warm = Vector::Zero(mk);
      double best = std::numeric_limits<double>::infinity();
      for (int k = 0; k < cfg.path_length; ++k) {
        const double frac = static_cast<double>(k) / static_cast<double>(cfg.path_length - 1);
        const double lam = lmax * std::pow(cfg.path_min_ratio, frac);
        const LassoSolution sol = solve_lasso(problem, lam, warm, cfg.max_iter, cfg.tol);
        warm = sol.beta;
        std::vector<Eigen::Index> s;
        const Vector r = to_row(sol.beta, s);
        const double rss = std::max(
            problem.yy - 2.0 * r.dot(cov_y.col(i)) + r.dot(cov * r), 0.0);
        const double bic = static_cast<double>(T) * std::log(std::max(rss, 1e-300)) +
                           std::log(static_cast<double>(T)) * static_cast<double>(s.size());
        if (bic < best) {
          best = bic;
          lambda = lam;
          row = r;
          support = std::move(s);
        }
      }
    } else {
      lambda = cfg.lambda_rule.kind == LambdaRule::Kind::Fixed
                   ? cfg.lambda_rule.value
                   : theory_lambda(cfg.lambda_rule.value, p, m, T);
      const LassoSolution sol = solve_lasso(problem, lambda, Vector(), cfg.max_iter, cfg.tol);
      row = to_row(sol.beta, support);
    }
    fit.Bhat.row(i) = row.transpose();
    fit.intercept(i) = ybar(i) - design.mean.dot(row);
    fit.lambdas(i) = lambda;
    fit.supports[static_cast<std::size_t>(i)] = std::move(support);
  }
  fit.residuals = residuals(fit, y, z);
  return fit;
}

RegressionFit fit(const SeriesMatrix& y, const SeriesMatrix& z, const RegressionConfig& cfg) {
  cfg.validate();
  return cfg.mode == Mode::OLS ? fit_ols(y, z, cfg.intercept) : fit_lasso(y, z, cfg);
}

SeriesMatrix residuals(const RegressionFit& fit, const SeriesMatrix& y, const SeriesMatrix& z) {
  check_shapes(y, z);
  if (fit.Bhat.rows() != y.dim() || fit.Bhat.cols() != z.dim() ||
      fit.intercept.size() != y.dim()) {
    throw DimensionError("residuals: fit shapes do not match Y and Z");
  }
  Matrix r = y.values() - z.values() * fit.Bhat.transpose();
  r.rowwise() -= fit.intercept.transpose();
  return SeriesMatrix(std::move(r));
}

}  // namespace factorreg::regression
