#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "factorreg/pipeline.hpp"
#include "factorreg/simulate.hpp"

namespace factorreg::cli {

struct ReplicateGrid {
  int n_reps = 100;
  std::vector<std::pair<double, double>> deltas{{0.0, 0.0}};
  std::vector<Eigen::Index> p{50};
  std::vector<Eigen::Index> T{300};
};

/// Parameters of every subcommand. Filled from an optional JSON file, then
/// overridden by flags, then validated.
struct RunConfig {
  std::filesystem::path out_dir = ".";
  std::filesystem::path y_path;      // empty: <out_dir>/y.csv
  std::filesystem::path z_path;      // empty: <out_dir>/z.csv
  std::filesystem::path truth_path;  // optional scoring input of fit
  bool header = false;
  int jobs = 1;
  simulate::SimScenario scenario;
  bool pipeline_from_design = true;  // no explicit regression section
  PipelineConfig pipeline;
  int T0 = 24;
  ReplicateGrid grid;

  void validate() const;
  std::filesystem::path y_file() const { return y_path.empty() ? out_dir / "y.csv" : y_path; }
  std::filesystem::path z_file() const { return z_path.empty() ? out_dir / "z.csv" : z_path; }
  /// Explicit pipeline, or the design default with factor settings kept.
  PipelineConfig effective_pipeline() const;
};

/// Parses the JSON config. Unknown keys and ill-typed values throw
/// ConfigError.
RunConfig parse_config(const std::string& json_text);

/// Every command creates out_dir if needed and returns the written paths.
std::vector<std::filesystem::path> cmd_simulate(const RunConfig& cfg);
std::vector<std::filesystem::path> cmd_fit(const RunConfig& cfg);
std::vector<std::filesystem::path> cmd_forecast(const RunConfig& cfg);
std::vector<std::filesystem::path> cmd_replicate(const RunConfig& cfg);

/// Table of P(rhat = r): one row per (delta1, delta2, p), one column per T.
std::string probability_table(const std::vector<simulate::ReplicationReport>& reports);

/// Full command line entry point; returns the process exit code.
int run(int argc, char** argv);

}  // namespace factorreg::cli
