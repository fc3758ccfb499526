#include "factorreg/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "factorreg/metrics.hpp"
#include "factorreg/rng.hpp"

namespace factorreg::simulate {
namespace {

// Sub-stream labels of the design and innovation generators.
enum DesignStream : std::uint64_t { kPhi1 = 1, kPhi2 = 2, kBValues = 3, kBSupport = 4 };
enum InnovationStream : std::uint64_t { kXi = 0, kW = 1, kEps = 2 };

double signed_uniform_magnitude(CounterRng& rng) {
  const double magnitude = rng.uniform(1.0, 2.0);
  return rng.uniform() < 0.5 ? -magnitude : magnitude;
}

// AR(1) with diagonal coefficients started at zero; the first burn_in
// steps are discarded.
Matrix diagonal_ar1(const Vector& phi, Eigen::Index T, int burn_in, CounterRng rng) {
  const auto d = phi.size();
  Matrix out(T, d);
  Vector state = Vector::Zero(d);
  for (Eigen::Index t = -burn_in; t < T; ++t) {
    for (Eigen::Index j = 0; j < d; ++j) state(j) = phi(j) * state(j) + rng.normal();
    if (t >= 0) out.row(t) = state.transpose();
  }
  return out;
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

double interpolated_quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

ReplicateRecord run_one(const SimScenario& base, const ScenarioDesign& design, int index,
                        const PipelineConfig& cfg, unsigned metrics) {
  ReplicateRecord rec;
  rec.index = index;
  rec.seed = replicate_seed(base.seed, static_cast<std::uint64_t>(index));
  SimScenario sc = base;
  sc.seed = rec.seed;
  try {
    const GroundTruth truth = simulate_with_design(sc, design);
    const SeriesMatrix y(truth.y);
    const SeriesMatrix z(truth.z);
    const bool needs_factor = (metrics & (kMetricRhat | kMetricDbar | kMetricRmse)) != 0;
    if (!needs_factor) {
      const regression::RegressionFit fit = regression::fit(y, z, cfg.regression);
      rec.b_error = (fit.Bhat - truth.B).norm();
      return rec;
    }
    const PipelineFit fit = fit_pipeline(y, z, cfg);
    rec.b_error = (fit.regression.Bhat - truth.B).norm();
    rec.rhat = fit.factor.rhat;
    rec.shat = fit.factor.shat;
    if (fit.factor.rhat > 0) {
      rec.dbar = metrics::distance_dbar(fit.factor.A1hat.matrix(), truth.L1);
      rec.rmse = metrics::factor_rmse(fit.factor.A1hat.matrix(), fit.factor.xhat, truth.L1, truth.f);
    } else {
      rec.dbar = nan();
      rec.rmse = nan();
    }
  } catch (const Error& e) {
    rec.ok = false;
    rec.error = e.what();
  }
  return rec;
}

}  // namespace

std::string to_string(Design d) { return d == Design::Example1 ? "example1" : "example2"; }

Design design_from_string(const std::string& s) {
  if (s == "example1" || s == "EXAMPLE1" || s == "1") return Design::Example1;
  if (s == "example2" || s == "EXAMPLE2" || s == "2") return Design::Example2;
  throw ConfigError("unknown design '" + s + "' (expected example1 or example2)");
}

void SimScenario::validate() const {
  if (r < 1 || s < 0) throw ConfigError("scenario needs r >= 1 and s >= 0");
  if (r + s >= p) throw ConfigError("scenario needs r + s < p");
  if (m < 1 || m >= T) throw ConfigError("scenario needs 1 <= m < T");
  if (T < 3) throw ConfigError("scenario needs T >= 3");
  if (!(delta1 >= 0.0 && delta1 < 1.0) || !(delta2 >= 0.0 && delta2 < 1.0)) {
    throw ConfigError("delta1 and delta2 must lie in [0, 1)");
  }
  if (design == Design::Example2 && (sparsity < 1 || sparsity > m)) {
    throw ConfigError("Example2 needs 1 <= sparsity <= m");
  }
  if (!(tail_scale > 0.0)) throw ConfigError("tail_scale must be > 0");
  if (burn_in < 0) throw ConfigError("burn_in must be >= 0");
}

Loadings make_loadings(Eigen::Index p, int r, int s, double delta1, double delta2,
                       double tail_scale, std::uint64_t seed) {
  if (r < 1 || s < 0 || r + s >= p) throw ConfigError("make_loadings: need r + s < p");
  CounterRng rng(seed);
  const Matrix g = rng.normal_matrix(p, p);
  Eigen::BDCSVD<Matrix> svd(g, Eigen::ComputeFullU);
  const Matrix& q = svd.matrixU();

  const double pd = static_cast<double>(p);
  Loadings out;
  out.L1 = q.leftCols(r) * std::pow(pd, (1.0 - delta1) / 2.0);
  out.L2 = q.rightCols(p - r);
  out.L2.leftCols(s) *= std::pow(pd, (1.0 - delta2) / 2.0);
  out.L2.rightCols(p - r - s) *= tail_scale;
  return out;
}

ScenarioDesign make_design(const SimScenario& sc) {
  sc.validate();
  ScenarioDesign d;
  d.loadings = make_loadings(sc.p, sc.r, sc.s, sc.delta1, sc.delta2, sc.tail_scale, sc.design_seed);
  const CounterRng root(sc.design_seed);

  CounterRng phi_rng = root.split(kPhi1);
  d.phi1.resize(sc.m);
  for (Eigen::Index j = 0; j < sc.m; ++j) d.phi1(j) = phi_rng.uniform(0.5, 0.9);
  phi_rng = root.split(kPhi2);
  d.phi2.resize(sc.r);
  for (int j = 0; j < sc.r; ++j) d.phi2(j) = phi_rng.uniform(0.5, 0.9);

  CounterRng b_rng = root.split(kBValues);
  d.B.resize(sc.p, sc.m);
  for (Eigen::Index i = 0; i < sc.p; ++i) {
    for (Eigen::Index j = 0; j < sc.m; ++j) d.B(i, j) = signed_uniform_magnitude(b_rng);
  }
  if (sc.design == Design::Example2) {
    CounterRng pick = root.split(kBSupport);
    std::vector<Eigen::Index> cols(static_cast<std::size_t>(sc.m));
    for (Eigen::Index i = 0; i < sc.p; ++i) {
      std::iota(cols.begin(), cols.end(), Eigen::Index{0});
      // Partial Fisher-Yates: the first `sparsity` entries are the support.
      for (int k = 0; k < sc.sparsity; ++k) {
        const auto remaining = static_cast<std::uint64_t>(sc.m - k);
        const auto j = static_cast<std::size_t>(k) + static_cast<std::size_t>(pick.below(remaining));
        std::swap(cols[static_cast<std::size_t>(k)], cols[j]);
      }
      Vector row = Vector::Zero(sc.m);
      for (int k = 0; k < sc.sparsity; ++k) {
        const auto j = cols[static_cast<std::size_t>(k)];
        row(j) = d.B(i, j);
      }
      d.B.row(i) = row.transpose();
    }
  }
  return d;
}

GroundTruth simulate_with_design(const SimScenario& sc, const ScenarioDesign& design) {
  sc.validate();
  const CounterRng root(sc.seed);
  GroundTruth g;
  g.B = design.B;
  g.L1 = design.loadings.L1;
  g.L2 = design.loadings.L2;
  g.Phi1 = design.phi1.asDiagonal();
  g.Phi2 = design.phi2.asDiagonal();
  g.z = diagonal_ar1(design.phi1, sc.T, sc.burn_in, root.split(kXi));
  g.f = diagonal_ar1(design.phi2, sc.T, sc.burn_in, root.split(kW));
  CounterRng eps_rng = root.split(kEps);
  g.eps = eps_rng.normal_matrix(sc.T, sc.p - sc.r);
  g.y = g.z * g.B.transpose() + g.f * g.L1.transpose() + g.eps * g.L2.transpose();
  return g;
}

GroundTruth simulate_example1(const SimScenario& sc) {
  if (sc.design != Design::Example1) throw ConfigError("simulate_example1 needs design example1");
  return simulate_with_design(sc, make_design(sc));
}

GroundTruth simulate_example2(const SimScenario& sc) {
  if (sc.design != Design::Example2) throw ConfigError("simulate_example2 needs design example2");
  if (sc.sparsity > sc.m) throw ConfigError("sparsity exceeds m");
  return simulate_with_design(sc, make_design(sc));
}

GroundTruth simulate(const SimScenario& sc) {
  return sc.design == Design::Example1 ? simulate_example1(sc) : simulate_example2(sc);
}

Quartiles quartiles(std::vector<double> values) {
  values.erase(std::remove_if(values.begin(), values.end(), [](double v) { return !std::isfinite(v); }),
               values.end());
  Quartiles q;
  q.n = values.size();
  if (values.empty()) {
    q.q1 = q.median = q.q3 = nan();
    return q;
  }
  std::sort(values.begin(), values.end());
  q.q1 = interpolated_quantile(values, 0.25);
  q.median = interpolated_quantile(values, 0.5);
  q.q3 = interpolated_quantile(values, 0.75);
  return q;
}

PipelineConfig default_pipeline(Design design) {
  PipelineConfig cfg;
  if (design == Design::Example2) {
    cfg.regression.mode = regression::Mode::LASSO;
    cfg.regression.refit = true;
    cfg.regression.lambda_rule = regression::LambdaRule::bic();
  }
  return cfg;
}

ReplicationReport replicate(const SimScenario& sc, int n_reps, const PipelineConfig& cfg,
                            unsigned metrics, int jobs) {
  if (n_reps < 1) throw ConfigError("replicate: n_reps must be >= 1");
  cfg.validate();
  const ScenarioDesign design = make_design(sc);

  ReplicationReport rep;
  rep.scenario = sc;
  rep.n_reps = n_reps;
  rep.records.resize(static_cast<std::size_t>(n_reps));

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n_reps; i = next++) {
      rep.records[static_cast<std::size_t>(i)] = run_one(sc, design, i, cfg, metrics);
    }
  };
  const int n_threads = std::clamp(jobs, 1, n_reps);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<double> b_err;
  std::vector<double> dbar;
  std::vector<double> rmse;
  int correct = 0;
  int ok = 0;
  for (const auto& rec : rep.records) {
    if (!rec.ok) {
      ++rep.failures;
      continue;
    }
    ++ok;
    if (rec.rhat == sc.r) ++correct;
    b_err.push_back(rec.b_error);
    if (metrics & kMetricDbar) dbar.push_back(rec.dbar);
    if (metrics & kMetricRmse) rmse.push_back(rec.rmse);
  }
  rep.prob_rhat_correct = ok > 0 ? static_cast<double>(correct) / ok : nan();
  if (!(metrics & kMetricRhat)) rep.prob_rhat_correct = nan();
  rep.b_error = quartiles(std::move(b_err));
  rep.dbar = quartiles(std::move(dbar));
  rep.rmse = quartiles(std::move(rmse));
  return rep;
}

std::string reports_to_csv(const std::vector<ReplicationReport>& reports) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "design,delta1,delta2,p,T,m,r,s,n_reps,failures,p_rhat_eq_r,"
         "b_error_q1,b_error_median,b_error_q3,dbar_q1,dbar_median,dbar_q3,"
         "rmse_q1,rmse_median,rmse_q3\n";
  for (const auto& rep : reports) {
    const auto& sc = rep.scenario;
    out << to_string(sc.design) << ',' << sc.delta1 << ',' << sc.delta2 << ',' << sc.p << ','
        << sc.T << ',' << sc.m << ',' << sc.r << ',' << sc.s << ',' << rep.n_reps << ','
        << rep.failures << ',' << rep.prob_rhat_correct << ',' << rep.b_error.q1 << ','
        << rep.b_error.median << ',' << rep.b_error.q3 << ',' << rep.dbar.q1 << ','
        << rep.dbar.median << ',' << rep.dbar.q3 << ',' << rep.rmse.q1 << ','
        << rep.rmse.median << ',' << rep.rmse.q3 << '\n';
  }
  return out.str();
}

}  // namespace factorreg::simulate
