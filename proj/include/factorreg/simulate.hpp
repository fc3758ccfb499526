#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "factorreg/pipeline.hpp"

namespace factorreg::simulate {

enum class Design { Example1, Example2 };

std::string to_string(Design d);
Design design_from_string(const std::string& s);

/// Data-generating process of the two simulation designs.
///
/// Loadings, AR coefficients and B are drawn from `design_seed`, so they
/// stay fixed across replicates of the same scenario; innovations are drawn
/// from `seed`.
struct SimScenario {
  Design design = Design::Example1;
  Eigen::Index p = 50;
  Eigen::Index T = 300;
  Eigen::Index m = 5;
  int r = 3;
  int s = 3;
  double delta1 = 0.0;
  double delta2 = 0.0;
  std::uint64_t seed = 1;
  std::uint64_t design_seed = 1234;
  int sparsity = 5;         // nonzeros per row of B (Example2)
  double tail_scale = 2.0;  // bounded singular values of L2
  int burn_in = 200;

  void validate() const;
};

struct Loadings {
  Matrix L1;  // p x r,     singular values p^{(1-delta1)/2}
  Matrix L2;  // p x (p-r), s singular values p^{(1-delta2)/2}, rest tail_scale
};

/// Left singular vectors Q = [Q1 Q2] of a seeded p x p Gaussian matrix,
/// scaled column-wise into L1 and L2.
Loadings make_loadings(Eigen::Index p, int r, int s, double delta1, double delta2,
                       double tail_scale, std::uint64_t seed);

/// Replicate-invariant part of a scenario.
struct ScenarioDesign {
  Loadings loadings;
  Vector phi1;  // m, diagonal of the regressor AR matrix
  Vector phi2;  // r, diagonal of the factor AR matrix
  Matrix B;     // p x m
};

ScenarioDesign make_design(const SimScenario& sc);

struct GroundTruth {
  Matrix B;
  Matrix L1;
  Matrix L2;
  Matrix f;    // T x r
  Matrix eps;  // T x (p - r)
  Matrix z;    // T x m
  Matrix y;    // T x p
  Matrix Phi1;  // m x m diagonal
  Matrix Phi2;  // r x r diagonal
};

/// Draws innovations from sc.seed on top of a precomputed design.
GroundTruth simulate_with_design(const SimScenario& sc, const ScenarioDesign& design);

GroundTruth simulate_example1(const SimScenario& sc);
GroundTruth simulate_example2(const SimScenario& sc);
/// Dispatches on sc.design.
GroundTruth simulate(const SimScenario& sc);

enum MetricFlags : unsigned {
  kMetricRhat = 1u << 0,
  kMetricBError = 1u << 1,
  kMetricDbar = 1u << 2,
  kMetricRmse = 1u << 3,
  kMetricAll = kMetricRhat | kMetricBError | kMetricDbar | kMetricRmse,
};

struct ReplicateRecord {
  int index = 0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  int rhat = -1;
  int shat = -1;
  double b_error = 0.0;  // ||Bhat - B||_F
  double dbar = 0.0;     // Dbar(A1hat, L1); NaN when rhat == 0
  double rmse = 0.0;     // NaN when rhat == 0
};

struct Quartiles {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  std::size_t n = 0;
};

/// Linear-interpolation quartiles of the finite entries.
Quartiles quartiles(std::vector<double> values);

struct ReplicationReport {
  SimScenario scenario;
  int n_reps = 0;
  int failures = 0;
  double prob_rhat_correct = 0.0;  // over successful replicates
  Quartiles b_error;
  Quartiles dbar;
  Quartiles rmse;
  std::vector<ReplicateRecord> records;
};

/// Pipeline settings matching a design: OLS for Example1, Lasso with a
/// BIC-selected penalty and support refit for Example2.
PipelineConfig default_pipeline(Design design);

/// Runs n_reps independent replicates. Replicate i uses the innovation seed
/// replicate_seed(sc.seed, i), so results do not depend on `jobs` or on
/// scheduling. Per-replicate failures are recorded, not thrown.
ReplicationReport replicate(const SimScenario& sc, int n_reps, const PipelineConfig& cfg,
                            unsigned metrics = kMetricAll, int jobs = 1);

/// Long-format CSV: a header plus one row per report.
std::string reports_to_csv(const std::vector<ReplicationReport>& reports);

}  // namespace factorreg::simulate
