#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "factorreg/errors.hpp"
#include "factorreg/forecast.hpp"
#include "factorreg/io.hpp"
#include "factorreg/metrics.hpp"

namespace factorreg::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Reads the keys of one JSON object and remembers which ones were used, so
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(label() + " must be a JSON object");
  }

  template <class T>
  bool get(const std::string& key, T& out) {
    used_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return false;
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(label(key) + ": " + e.what());
    }
    return true;
  }

  const json* child(const std::string& key) {
    used_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string label(const std::string& key = {}) const {
    std::string s = path_.empty() ? "config" : path_;
    return key.empty() ? s : s + "." + key;
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!used_.count(item.key())) throw ConfigError("unknown key '" + label(item.key()) + "'");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

Matrix matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw ParseError(what + " must be an array of rows", 0);
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j.at(0).size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ParseError(what + ": ragged row " + std::to_string(i + 1), i + 1);
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
  }
  return m;
}

json warnings_json(const std::vector<Warning>& ws) {
  json out = json::array();
  for (const auto w : ws) out.push_back(to_string(w));
  return out;
}

std::string mode_name(regression::Mode m) { return m == regression::Mode::OLS ? "ols" : "lasso"; }

std::string rule_name(regression::LambdaRule::Kind k) {
  switch (k) {
    case regression::LambdaRule::Kind::Fixed: return "fixed";
    case regression::LambdaRule::Kind::Theory: return "theory";
    case regression::LambdaRule::Kind::Bic: return "bic";
  }
  return "theory";
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IOError("cannot create directory '" + dir.string() + "': " + ec.message());
}

std::pair<SeriesMatrix, SeriesMatrix> read_inputs(const RunConfig& cfg) {
  const Matrix y = io::read_csv(cfg.y_file(), cfg.header);
  const Matrix z = io::read_csv(cfg.z_file(), cfg.header);
  if (y.rows() != z.rows()) {
    throw DimensionError("y has " + std::to_string(y.rows()) + " rows but z has " +
                         std::to_string(z.rows()));
  }
  return {SeriesMatrix(y), SeriesMatrix(z)};
}

void parse_scenario(Section& s, simulate::SimScenario& sc, bool& m_given) {
  std::string design;
  if (s.get("design", design)) sc.design = simulate::design_from_string(design);
  m_given = s.get("m", sc.m);
  s.get("p", sc.p);
  s.get("T", sc.T);
  s.get("r", sc.r);
  s.get("s", sc.s);
  s.get("delta1", sc.delta1);
  s.get("delta2", sc.delta2);
  s.get("design_seed", sc.design_seed);
  s.get("sparsity", sc.sparsity);
  s.get("tail_scale", sc.tail_scale);
  s.get("burn_in", sc.burn_in);
  s.finish();
}

void parse_regression(Section& s, regression::RegressionConfig& rc) {
  std::string mode;
  if (s.get("mode", mode)) {
    mode = lower(mode);
    if (mode == "ols") {
      rc.mode = regression::Mode::OLS;
    } else if (mode == "lasso") {
      rc.mode = regression::Mode::LASSO;
    } else {
      throw ConfigError(s.label("mode") + ": expected 'ols' or 'lasso'");
    }
  }
  std::string rule;
  double value = rc.lambda_rule.value;
  const bool has_value = s.get("lambda", value);
  if (s.get("lambda_rule", rule)) {
    rule = lower(rule);
    if (rule == "fixed") {
      if (!has_value) throw ConfigError(s.label("lambda") + " is required by the fixed rule");
      rc.lambda_rule = regression::LambdaRule::fixed(value);
    } else if (rule == "theory") {
      rc.lambda_rule = regression::LambdaRule::theory(has_value ? value : 1.0);
    } else if (rule == "bic") {
      rc.lambda_rule = regression::LambdaRule::bic();
    } else {
      throw ConfigError(s.label("lambda_rule") + ": expected 'fixed', 'theory' or 'bic'");
    }
  } else if (has_value) {
    rc.lambda_rule.value = value;
  }
  s.get("refit", rc.refit);
  s.get("intercept", rc.intercept);
  s.get("max_iter", rc.max_iter);
  s.get("tol", rc.tol);
  s.get("path_length", rc.path_length);
  s.get("path_min_ratio", rc.path_min_ratio);
  s.finish();
}

void parse_factor(Section& s, factor::FactorConfig& fc) {
  s.get("k0", fc.k0);
  if (const json* r = s.child("r"); r != nullptr && !r->is_null()) {
    if (!r->is_number_integer()) throw ConfigError(s.label("r") + " must be an integer or null");
    fc.r = r->get<int>();
  }
  if (const json* d = s.child("d_u"); d != nullptr && !d->is_null()) {
    if (!d->is_number_integer()) throw ConfigError(s.label("d_u") + " must be an integer or null");
    fc.d_u = d->get<int>();
  }
  s.finish();
}

void parse_whitenoise(Section& s, whitenoise::WhiteNoiseConfig& wn) {
  s.get("N", wn.N);
  s.get("alpha", wn.alpha);
  s.get("epsilon_trim", wn.epsilon_trim);
  s.get("small_m_fraction", wn.small_m_fraction);
  s.get("i_max", wn.i_max);
  s.finish();
}

void parse_forecast(Section& s, RunConfig& cfg) {
  s.get("T0", cfg.T0);
  std::string mode;
  if (s.get("z_var_mode", mode)) {
    mode = lower(mode);
    if (mode == "auto") {
      cfg.pipeline.z_var_mode.reset();
    } else if (mode == "dense") {
      cfg.pipeline.z_var_mode = VarMode::Dense;
    } else if (mode == "sparse") {
      cfg.pipeline.z_var_mode = VarMode::Sparse;
    } else {
      throw ConfigError(s.label("z_var_mode") + ": expected 'auto', 'dense' or 'sparse'");
    }
  }
  s.get("var_lambda", cfg.pipeline.var_lambda);
  s.finish();
}

void parse_grid(Section& s, ReplicateGrid& g) {
  s.get("n_reps", g.n_reps);
  if (const json* d = s.child("deltas"); d != nullptr) {
    if (!d->is_array()) throw ConfigError(s.label("deltas") + " must be a list of pairs");
    g.deltas.clear();
    for (const auto& pair : *d) {
      if (!pair.is_array() || pair.size() != 2) {
        throw ConfigError(s.label("deltas") + " entries must be [delta1, delta2]");
      }
      try {
        g.deltas.emplace_back(pair[0].get<double>(), pair[1].get<double>());
      } catch (const json::exception& e) {
        throw ConfigError(s.label("deltas") + ": " + e.what());
      }
    }
  }
  s.get("p", g.p);
  s.get("T", g.T);
  s.finish();
}

std::vector<fs::path> write_fit_outputs(const RunConfig& cfg, const SeriesMatrix& y,
                                        const SeriesMatrix& z, const PipelineConfig& pc,
                                        const PipelineFit& fit) {
  const auto& rf = fit.regression;
  const auto& ff = fit.factor;
  const fs::path dir = cfg.out_dir;
  std::vector<fs::path> written{dir / "fit.json", dir / "Bhat.csv", dir / "A1hat.csv",
                                dir / "xhat.csv", dir / "residuals.csv"};

  json j;
  j["T"] = y.T();
  j["p"] = y.dim();
  j["m"] = z.dim();
  j["rhat"] = ff.rhat;
  j["r_forced"] = pc.factor.r.has_value();
  j["shat"] = ff.shat;
  j["k0"] = pc.factor.k0;
  j["M_eigs"] = vector_json(ff.M_eigs);
  j["S_eigs"] = vector_json(ff.S_eigs);
  j["sigma_min"] = ff.sigma_min;
  j["regression"] = {{"mode", mode_name(pc.regression.mode)},
                     {"lambda_rule", rule_name(pc.regression.lambda_rule.kind)},
                     {"refit", pc.regression.refit}};
  j["lambdas"] = vector_json(rf.lambdas);
  json sizes = json::array();
  for (const auto& s : rf.supports) sizes.push_back(s.size());
  j["support_sizes"] = std::move(sizes);
  j["intercept"] = vector_json(rf.intercept);
  json decisions = json::array();
  for (std::size_t i = 0; i < ff.decisions.size(); ++i) {
    const auto& d = ff.decisions[i];
    decisions.push_back({{"step", i + 1},
                         {"statistic", d.statistic},
                         {"critical_value", finite_or_null(d.critical_value)},
                         {"reject", d.reject},
                         {"d_i", d.d_i},
                         {"d_whitened", d.d_whitened},
                         {"K_effective", d.K_effective}});
  }
  j["decisions"] = std::move(decisions);
  j["warnings"] = warnings_json(ff.warnings);

  if (!cfg.truth_path.empty()) {
    const json truth = json::parse(io::read_text(cfg.truth_path));
    const Matrix B = matrix_from_json(truth.at("B"), "truth B");
    if (B.rows() != rf.Bhat.rows() || B.cols() != rf.Bhat.cols()) {
      throw DimensionError("truth B does not match the fitted coefficient shape");
    }
    json score;
    score["b_error"] = (rf.Bhat - B).norm();
    score["dbar"] = nullptr;
    score["rmse"] = nullptr;
    if (ff.rhat > 0) {
      const Matrix L1 = matrix_from_json(truth.at("L1"), "truth L1");
      score["dbar"] = metrics::distance_dbar(ff.A1hat.matrix(), L1);
      if (truth.contains("f")) {
        const Matrix f = matrix_from_json(truth.at("f"), "truth f");
        score["rmse"] = metrics::factor_rmse(ff.A1hat.matrix(), ff.xhat, L1, f);
      }
    }
    j["score"] = std::move(score);
  }

  io::write_text(dir / "fit.json", j.dump(2) + "\n");
  io::write_csv(dir / "Bhat.csv", rf.Bhat, cfg.header, "z");
  io::write_csv(dir / "A1hat.csv", ff.A1hat.matrix(), cfg.header, "a");
  io::write_csv(dir / "xhat.csv", ff.xhat, cfg.header, "x");
  io::write_csv(dir / "residuals.csv", rf.residuals.values(), cfg.header, "e");
  return written;
}

std::string format_cell(double v) { return std::isfinite(v) ? io::format_double(v) : "NA"; }

}  // namespace

void RunConfig::validate() const {
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  if (T0 < 1) throw ConfigError("T0 must be >= 1");
  if (grid.n_reps < 1) throw ConfigError("replicate.n_reps must be >= 1");
  if (grid.deltas.empty() || grid.p.empty() || grid.T.empty()) {
    throw ConfigError("replicate grid lists must be non-empty");
  }
  scenario.validate();
  effective_pipeline().validate();
}

PipelineConfig RunConfig::effective_pipeline() const {
  if (!pipeline_from_design) return pipeline;
  PipelineConfig pc = simulate::default_pipeline(scenario.design);
  pc.factor = pipeline.factor;
  pc.z_var_mode = pipeline.z_var_mode;
  pc.var_lambda = pipeline.var_lambda;
  return pc;
}

RunConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  Section top(root, "");
  std::string path;
  if (top.get("out_dir", path)) cfg.out_dir = path;
  if (top.get("y", path)) cfg.y_path = path;
  if (top.get("z", path)) cfg.z_path = path;
  if (top.get("truth", path)) cfg.truth_path = path;
  top.get("header", cfg.header);
  top.get("jobs", cfg.jobs);
  top.get("seed", cfg.scenario.seed);

  bool m_given = false;
  if (const json* j = top.child("scenario")) {
    Section s(*j, "scenario");
    parse_scenario(s, cfg.scenario, m_given);
  }
  if (cfg.scenario.design == simulate::Design::Example2 && !m_given) cfg.scenario.m = 40;
  if (const json* j = top.child("regression")) {
    Section s(*j, "regression");
    parse_regression(s, cfg.pipeline.regression);
    cfg.pipeline_from_design = false;
  }
  if (const json* j = top.child("factor")) {
    Section s(*j, "factor");
    parse_factor(s, cfg.pipeline.factor);
  }
  if (const json* j = top.child("whitenoise")) {
    Section s(*j, "whitenoise");
    parse_whitenoise(s, cfg.pipeline.factor.wn);
  }
  if (const json* j = top.child("forecast")) {
    Section s(*j, "forecast");
    parse_forecast(s, cfg);
  }
  if (const json* j = top.child("replicate")) {
    Section s(*j, "replicate");
    parse_grid(s, cfg.grid);
  }
  top.finish();
  return cfg;
}

std::vector<fs::path> cmd_simulate(const RunConfig& cfg) {
  cfg.validate();
  ensure_dir(cfg.out_dir);
  const auto& sc = cfg.scenario;
  const simulate::GroundTruth truth = simulate::simulate(sc);

  json j;
  j["scenario"] = {{"design", simulate::to_string(sc.design)},
                   {"p", sc.p},
                   {"T", sc.T},
                   {"m", sc.m},
                   {"r", sc.r},
                   {"s", sc.s},
                   {"delta1", sc.delta1},
                   {"delta2", sc.delta2},
                   {"sparsity", sc.sparsity},
                   {"tail_scale", sc.tail_scale},
                   {"burn_in", sc.burn_in}};
  j["seed"] = sc.seed;
  j["design_seed"] = sc.design_seed;
  j["B"] = matrix_json(truth.B);
  j["L1"] = matrix_json(truth.L1);
  j["phi1"] = vector_json(truth.Phi1.diagonal());
  j["phi2"] = vector_json(truth.Phi2.diagonal());
  j["f"] = matrix_json(truth.f);

  const fs::path y = cfg.out_dir / "y.csv";
  const fs::path z = cfg.out_dir / "z.csv";
  const fs::path t = cfg.out_dir / "truth.json";
  io::write_csv(y, truth.y, cfg.header, "y");
  io::write_csv(z, truth.z, cfg.header, "z");
  io::write_text(t, j.dump(2) + "\n");
  return {y, z, t};
}

std::vector<fs::path> cmd_fit(const RunConfig& cfg) {
  cfg.validate();
  const auto [y, z] = read_inputs(cfg);
  ensure_dir(cfg.out_dir);
  const PipelineConfig pc = cfg.effective_pipeline();
  const PipelineFit fit = fit_pipeline(y, z, pc);
  return write_fit_outputs(cfg, y, z, pc, fit);
}

std::vector<fs::path> cmd_forecast(const RunConfig& cfg) {
  cfg.validate();
  const auto [y, z] = read_inputs(cfg);
  const PipelineConfig pc = cfg.effective_pipeline();
  const forecast::RollingResult res = forecast::rolling_evaluate(y, z, cfg.T0, pc);
  ensure_dir(cfg.out_dir);

  std::string csv = "origin,series,actual,with_factors,regression_only\n";
  for (std::size_t i = 0; i < res.origins.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    for (Eigen::Index s = 0; s < res.y_actual.cols(); ++s) {
      csv += std::to_string(res.origins[i]) + ',' + std::to_string(s + 1) + ',' +
             io::format_double(res.y_actual(row, s)) + ',' +
             io::format_double(res.yhat_with_factors(row, s)) + ',' +
             io::format_double(res.yhat_regression_only(row, s)) + '\n';
    }
  }

  json j;
  j["T0"] = cfg.T0;
  j["origins"] = res.origins;
  j["fe_with_factors"] = finite_or_null(res.fe_with_factors);
  j["fe_regression_only"] = finite_or_null(res.fe_regression_only);
  j["rhat"] = res.rhat;
  j["failures"] = res.failures;
  j["failure_messages"] = res.failure_messages;

  const fs::path f = cfg.out_dir / "forecasts.csv";
  const fs::path e = cfg.out_dir / "fe.json";
  io::write_text(f, csv);
  io::write_text(e, j.dump(2) + "\n");
  return {f, e};
}

std::string probability_table(const std::vector<simulate::ReplicationReport>& reports) {
  std::vector<Eigen::Index> ts;
  std::vector<std::tuple<double, double, Eigen::Index>> rows;
  std::map<std::tuple<double, double, Eigen::Index, Eigen::Index>, double> cells;
  for (const auto& rep : reports) {
    const auto& sc = rep.scenario;
    if (std::find(ts.begin(), ts.end(), sc.T) == ts.end()) ts.push_back(sc.T);
    const auto key = std::make_tuple(sc.delta1, sc.delta2, sc.p);
    if (std::find(rows.begin(), rows.end(), key) == rows.end()) rows.push_back(key);
    cells[{sc.delta1, sc.delta2, sc.p, sc.T}] = rep.prob_rhat_correct;
  }
  std::sort(ts.begin(), ts.end());

  std::string out = "delta1,delta2,p";
  for (const auto t : ts) out += ",T=" + std::to_string(t);
  out += '\n';
  for (const auto& [d1, d2, p] : rows) {
    out += io::format_double(d1) + ',' + io::format_double(d2) + ',' + std::to_string(p);
    for (const auto t : ts) {
      const auto it = cells.find({d1, d2, p, t});
      out += ',';
      out += it == cells.end() ? "NA" : format_cell(it->second);
    }
    out += '\n';
  }
  return out;
}

std::vector<fs::path> cmd_replicate(const RunConfig& cfg) {
  cfg.validate();
  ensure_dir(cfg.out_dir);
  const PipelineConfig pc = cfg.effective_pipeline();
  std::vector<simulate::ReplicationReport> reports;
  for (const auto& [d1, d2] : cfg.grid.deltas) {
    for (const auto p : cfg.grid.p) {
      for (const auto T : cfg.grid.T) {
        simulate::SimScenario sc = cfg.scenario;
        sc.delta1 = d1;
        sc.delta2 = d2;
        sc.p = p;
        sc.T = T;
        reports.push_back(simulate::replicate(sc, cfg.grid.n_reps, pc, simulate::kMetricAll,
                                              cfg.jobs));
        const auto& rep = reports.back();
        std::cerr << "(" << d1 << "," << d2 << ") p=" << p << " T=" << T
                  << " P(rhat=r)=" << format_cell(rep.prob_rhat_correct)
                  << " failures=" << rep.failures << "\n";
      }
    }
  }
  const fs::path table = cfg.out_dir / "table.csv";
  const fs::path details = cfg.out_dir / "replicate.csv";
  io::write_text(table, probability_table(reports));
  io::write_text(details, simulate::reports_to_csv(reports));
  return {table, details};
}

int run(int argc, char** argv) {
  CLI::App app{"Regression with latent factor structure in high-dimensional time series"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  int jobs = 1;
  bool header = false;
  int r = 0;
  int k0 = 0;
  double alpha = 0.0;
  int N = 0;
  std::string out_dir;
  std::string y_path;
  std::string z_path;
  std::string truth_path;
  int T0 = 0;
  int reps = 0;

  auto* o_config = app.add_option("--config", config_path, "JSON configuration file");
  auto* o_seed = app.add_option("--seed", seed, "Master seed of all randomness");
  auto* o_jobs = app.add_option("--jobs", jobs, "Worker threads for replicate");
  auto* o_header = app.add_flag("--header", header, "CSV files carry one header row");
  auto* o_r = app.add_option("--r", r, "Force the number of factors");
  auto* o_k0 = app.add_option("--k0", k0, "Number of autocovariance lags");
  auto* o_alpha = app.add_option("--alpha", alpha, "Level of each white-noise test");
  auto* o_N = app.add_option("--N", N, "Maximum lag of the white-noise test");
  auto* o_out = app.add_option("--out-dir", out_dir, "Output directory");
  auto* o_y = app.add_option("--y", y_path, "Response CSV (default <out-dir>/y.csv)");
  auto* o_z = app.add_option("--z", z_path, "Regressor CSV (default <out-dir>/z.csv)");
  auto* o_truth = app.add_option("--truth", truth_path, "truth.json to score a fit against");
  auto* o_T0 = app.add_option("--T0", T0, "Evaluation window of forecast");
  auto* o_reps = app.add_option("--reps", reps, "Replicates per grid cell");

  auto* sim = app.add_subcommand("simulate", "Draw one data set from a scenario");
  auto* fit = app.add_subcommand("fit", "Estimate coefficients and latent factors");
  auto* fc = app.add_subcommand("forecast", "Rolling one-step forecast evaluation");
  auto* rep = app.add_subcommand("replicate", "Monte Carlo table of P(rhat = r)");
  for (auto* sub : {sim, fit, fc, rep}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    RunConfig cfg;
    if (o_config->count() > 0) cfg = parse_config(io::read_text(config_path));
    if (o_seed->count() > 0) cfg.scenario.seed = seed;
    if (o_jobs->count() > 0) cfg.jobs = jobs;
    if (o_header->count() > 0) cfg.header = header;
    if (o_r->count() > 0) cfg.pipeline.factor.r = r;
    if (o_k0->count() > 0) cfg.pipeline.factor.k0 = k0;
    if (o_alpha->count() > 0) cfg.pipeline.factor.wn.alpha = alpha;
    if (o_N->count() > 0) cfg.pipeline.factor.wn.N = N;
    if (o_out->count() > 0) cfg.out_dir = out_dir;
    if (o_y->count() > 0) cfg.y_path = y_path;
    if (o_z->count() > 0) cfg.z_path = z_path;
    if (o_truth->count() > 0) cfg.truth_path = truth_path;
    if (o_T0->count() > 0) cfg.T0 = T0;
    if (o_reps->count() > 0) cfg.grid.n_reps = reps;

    std::vector<fs::path> written;
    if (sim->parsed()) written = cmd_simulate(cfg);
    if (fit->parsed()) written = cmd_fit(cfg);
    if (fc->parsed()) written = cmd_forecast(cfg);
    if (rep->parsed()) written = cmd_replicate(cfg);
    for (const auto& p : written) std::cout << p.string() << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace factorreg::cli
