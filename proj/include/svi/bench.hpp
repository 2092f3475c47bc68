#pragma once

#include "svi/common.hpp"
#include "svi/nash_game.hpp"
#include "svi/subsolvers.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace svi {

enum class ExperimentKind { ScenarioSweep, DimensionSweep, RSweep, SingleRun };
std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& s);

std::string to_string(SubsolverMethod method);
SubsolverMethod method_from_string(const std::string& s);

// One benchmark campaign: the Cartesian product of scenario counts, player
// dimensions and proximal offsets, each cell run with every listed method
// for `repetitions` independently sampled instances.
//
// The proximal parameter per arm follows the offset j: the fixed-point arm
// uses r = max_xi |M_xi| + 0.1 + j (j >= 0), the Newton arm uses r = j
// (j > 0 required).  Instances are seeded from (master_seed, scenarios, m1,
// m2, repetition) only, so every arm and offset of a cell sees the same
// instances and adding grid cells never perturbs existing ones.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::SingleRun;
  std::string name = "experiment";
  std::vector<int> scenario_counts;
  std::vector<std::pair<int, int>> dims;  // (m1, m2)
  std::vector<double> r_offsets;
  std::vector<SubsolverMethod> methods;
  double sigma = 0.5;
  double stop_tol = 1e-5;
  int repetitions = 3;
  std::uint64_t master_seed = 1;
  long long max_outer_iters = 100000;
  long long max_inner_iters = 1'000'000;
  int threads = 1;
  NashRanges ranges;

  void validate() const;
};

struct RunRecord {
  std::string experiment;
  std::string cell_id;
  std::uint64_t seed = 0;
  std::string method;
  int scenarios = 0, m1 = 0, m2 = 0;
  double r = 0.0, sigma = 0.0;
  long long outer_iters = 0, inner_iters_total = 0;
  double wall_ms = 0.0, stop_quantity = 0.0, residual = 0.0;
  std::string status;
};

struct CellAggregate {
  std::string cell_id;
  std::string method;
  int scenarios = 0, m1 = 0, m2 = 0;
  double r_mean = 0.0;
  int runs = 0, converged = 0;
  // Means over converged runs only; NaN when nothing converged.
  double mean_outer_iters = 0.0;
  double mean_inner_iters = 0.0;
  double mean_wall_ms = 0.0;
};

struct ExperimentResult {
  std::vector<RunRecord> records;
  std::vector<CellAggregate> aggregates;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

// Fixed-column CSV for run records:
// experiment,cell-id,seed,method,scenarios,m1,m2,r,sigma,outer_iters,
// inner_iters_total,wall_ms,stop_quantity,residual,status.
// Numbers use shortest round-trip formatting.  Empty inputs are an error.
std::string emit_csv(const std::vector<RunRecord>& records);
std::vector<RunRecord> parse_run_csv(const std::string& text);

std::string emit_aggregate_csv(const std::vector<CellAggregate>& aggregates);

}  // namespace svi
