#include "factorreg/whitenoise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <string>

#include <boost/math/distributions/normal.hpp>

namespace factorreg::whitenoise {
namespace {

// Per-column counts from one sort of the full series: for each entry the
// number of strictly smaller entries and the size of its tie group. Ranks
// within a subsample follow by discounting the removed entries.
struct RankCounts {
  Matrix less;   // T x d
  Matrix equal;  // T x d, includes the entry itself

  explicit RankCounts(const Matrix& u) : less(u.rows(), u.cols()), equal(u.rows(), u.cols()) {
    const auto n = u.rows();
    std::vector<std::pair<double, Eigen::Index>> sorted(static_cast<std::size_t>(n));
    for (Eigen::Index c = 0; c < u.cols(); ++c) {
      for (Eigen::Index t = 0; t < n; ++t) sorted[static_cast<std::size_t>(t)] = {u(t, c), t};
      std::sort(sorted.begin(), sorted.end());
      Eigen::Index i = 0;
      while (i < n) {
        Eigen::Index j = i + 1;
        while (j < n && sorted[static_cast<std::size_t>(j)].first ==
                            sorted[static_cast<std::size_t>(i)].first) {
          ++j;
        }
        for (Eigen::Index k = i; k < j; ++k) {
          const auto t = sorted[static_cast<std::size_t>(k)].second;
          less(t, c) = static_cast<double>(i);
          equal(t, c) = static_cast<double>(j - i);
        }
        i = j;
      }
    }
  }
};

// Centered average ranks of rows [begin, begin + n) scaled to unit norm per
// column; `removed` lists the rows outside the window. Columns without rank
// variance are zeroed and reported.
Matrix window_ranks(const Matrix& u, const RankCounts& counts, Eigen::Index begin, Eigen::Index n,
                    const std::vector<Eigen::Index>& removed, bool& degenerate) {
  Matrix ranks(n, u.cols());
  for (Eigen::Index c = 0; c < u.cols(); ++c) {
    auto x = u.col(c).segment(begin, n).array();
    Eigen::ArrayXd less = counts.less.col(c).segment(begin, n).array();
    Eigen::ArrayXd equal = counts.equal.col(c).segment(begin, n).array();
    for (const auto t : removed) {
      const double xr = u(t, c);
      less -= (x > xr).cast<double>();
      equal -= (x == xr).cast<double>();
    }
    auto col = ranks.col(c);
    col = (less + 0.5 * (equal + 1.0)).matrix();
    col.array() -= col.mean();
    const double norm = col.norm();
    if (norm > 0.0) {
      col /= norm;
    } else {
      col.setZero();
      degenerate = true;
    }
  }
  return ranks;
}

// Spearman correlations between rows k..T-1 (lead) and rows 0..T-k-1 (lag).
Matrix lag_correlation(const Matrix& u, const RankCounts& counts, int k, bool& degenerate) {
  const auto T = u.rows();
  const auto n = T - k;
  std::vector<Eigen::Index> head(static_cast<std::size_t>(k));
  std::vector<Eigen::Index> tail(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    head[static_cast<std::size_t>(i)] = i;
    tail[static_cast<std::size_t>(i)] = n + i;
  }
  const Matrix lead = window_ranks(u, counts, k, n, head, degenerate);
  const Matrix lag = window_ranks(u, counts, 0, n, tail, degenerate);
  return lead.transpose() * lag;
}

}  // namespace

void WhiteNoiseConfig::validate() const {
  if (N < 1) throw ConfigError("N must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (!(epsilon_trim > 0.0 && epsilon_trim < 1.0)) {
    throw ConfigError("epsilon_trim must lie in (0, 1)");
  }
  if (m_regressors < 0) throw ConfigError("m_regressors must be >= 0");
  if (i_max < 1) throw ConfigError("i_max must be >= 1");
}

Matrix pca_orthogonalize(const Matrix& u) {
  if (u.rows() <= 2) throw DimensionError("pca_orthogonalize needs T > 2");
  if (u.cols() < 1) throw DimensionError("pca_orthogonalize needs at least one column");
  const Matrix centered = u.rowwise() - u.colwise().mean();
  const Matrix cov = (centered.transpose() * centered) / static_cast<double>(u.rows());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) throw LinAlgError("pca_orthogonalize: eigensolver failed");
  const Vector& values = eig.eigenvalues();  // ascending
  const double largest = values(values.size() - 1);
  if (!(largest > std::numeric_limits<double>::min())) {
    throw DegenerateInputError("pca_orthogonalize: input has zero variance");
  }
  Eigen::Index keep = 0;
  for (Eigen::Index i = values.size() - 1; i >= 0 && values(i) > 1e-10 * largest; --i) ++keep;
  Matrix scores(u.rows(), keep);
  for (Eigen::Index c = 0; c < keep; ++c) {
    const auto src = values.size() - 1 - c;
    scores.col(c) = centered * eig.eigenvectors().col(src) / std::sqrt(values(src));
  }
  return scores;
}

Matrix rank_autocorr(const Matrix& u, int k, std::vector<Warning>* warnings) {
  if (k < 1 || k > u.rows() - 2) {
    throw LagError("rank_autocorr: lag must satisfy 1 <= k <= T-2");
  }
  bool degenerate = false;
  const RankCounts counts(u);
  Matrix gamma = lag_correlation(u, counts, k, degenerate);
  if (degenerate && warnings != nullptr) warnings->push_back(Warning::DegenerateColumn);
  return gamma;
}

HdwnStatistic hdwn_statistic(const Matrix& u, int N) {
  if (N < 1 || N > u.rows() - 2) throw LagError("hdwn_statistic: need 1 <= N <= T-2");
  const double root_t = std::sqrt(static_cast<double>(u.rows()));
  HdwnStatistic out;
  const RankCounts counts(u);
  for (int k = 1; k <= N; ++k) {
    bool degenerate = false;
    const Matrix gamma = lag_correlation(u, counts, k, degenerate);
    out.statistic = std::max(out.statistic, root_t * gamma.cwiseAbs().maxCoeff());
  }
  out.K_effective = static_cast<Eigen::Index>(N) * u.cols() * u.cols();
  return out;
}

double gumbel_critical_value(Eigen::Index K_effective, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (K_effective < 1) throw ConfigError("K_effective must be >= 1");
  // Upper tail mass of one |N(0,1)| half: -log(1 - alpha) / (2K).
  const double tail = -std::log1p(-alpha) / (2.0 * static_cast<double>(K_effective));
  if (tail >= 1.0) return -std::numeric_limits<double>::infinity();
  const boost::math::normal standard;
  return boost::math::quantile(boost::math::complement(standard, tail));
}

WhiteNoiseDecision test_white_noise(const Matrix& u, int N, double alpha) {
  WhiteNoiseDecision d;
  d.d_i = u.cols();
  const Matrix white = pca_orthogonalize(u);
  const HdwnStatistic stat = hdwn_statistic(white, N);
  d.d_whitened = white.cols();
  d.statistic = stat.statistic;
  d.K_effective = stat.K_effective;
  d.critical_value = gumbel_critical_value(stat.K_effective, alpha);
  d.reject = d.statistic > d.critical_value;
  return d;
}

FactorCountSelection select_num_factors(const SeriesMatrix& e, const Matrix& ghat,
                                        const WhiteNoiseConfig& cfg) {
  cfg.validate();
  const auto p = e.dim();
  const auto T = e.T();
  if (ghat.rows() != p || ghat.cols() != p) {
    throw DimensionError("select_num_factors: ghat must be p x p");
  }
  const Matrix u = e.values() * ghat;  // row t is (G' e_t)'

  Eigen::Index tail = p;
  const auto m = cfg.m_regressors;
  if (m > 0 && static_cast<double>(m) <= cfg.small_m_fraction * static_cast<double>(p)) {
    tail = p - m;
  }
  if (p - m >= T) {
    const auto p_star =
        static_cast<Eigen::Index>(std::floor(cfg.epsilon_trim * static_cast<double>(T)));
    tail = std::min(tail, p_star);
  }
  if (tail < 2) {
    throw DimensionError("select_num_factors: tested dimension " + std::to_string(tail) +
                         " is below 2");
  }

  FactorCountSelection out;
  out.tested_tail = tail;
  const int cap = static_cast<int>(
      std::min<Eigen::Index>({static_cast<Eigen::Index>(cfg.i_max), p, tail - 1}));
  for (int i = 1; i <= cap; ++i) {
    const Matrix sub = u.middleCols(i - 1, tail - (i - 1));
    out.decisions.push_back(test_white_noise(sub, cfg.N, cfg.alpha));
    if (!out.decisions.back().reject) {
      out.rhat = i - 1;
      return out;
    }
  }
  out.rhat = cap;
  out.warnings.push_back(Warning::CapReached);
  return out;
}

}  // namespace factorreg::whitenoise
