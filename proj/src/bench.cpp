#include "svi/bench.hpp"

#include "svi/hedging.hpp"
#include "svi/io.hpp"
#include "svi/rng.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace svi {

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::ScenarioSweep: return "scenario-sweep";
    case ExperimentKind::DimensionSweep: return "dimension-sweep";
    case ExperimentKind::RSweep: return "r-sweep";
    case ExperimentKind::SingleRun: return "single-run";
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  if (s == "scenario-sweep") return ExperimentKind::ScenarioSweep;
  if (s == "dimension-sweep") return ExperimentKind::DimensionSweep;
  if (s == "r-sweep") return ExperimentKind::RSweep;
  if (s == "single-run") return ExperimentKind::SingleRun;
  throw ConfigError("unknown experiment kind: " + s);
}

std::string to_string(SubsolverMethod method) {
  return method == SubsolverMethod::FixedPoint ? "fixed-point" : "newton";
}

SubsolverMethod method_from_string(const std::string& s) {
  if (s == "fixed-point") return SubsolverMethod::FixedPoint;
  if (s == "newton") return SubsolverMethod::Newton;
  throw ConfigError("unknown subsolver method: " + s);
}

void ExperimentConfig::validate() const {
  if (name.empty()) throw ConfigError("experiment name must not be empty");
  if (scenario_counts.empty()) throw ConfigError("scenario_counts must not be empty");
  for (int s : scenario_counts)
    if (s < 1) throw ConfigError("scenario counts must be positive");
  if (dims.empty()) throw ConfigError("dims must not be empty");
  for (const auto& [m1, m2] : dims)
    if (m1 < 1 || m2 < 1) throw ConfigError("player dimensions must be positive");
  if (r_offsets.empty()) throw ConfigError("r_offsets must not be empty");
  if (methods.empty()) throw ConfigError("methods must not be empty");
  for (double j : r_offsets) {
    if (!std::isfinite(j)) throw ConfigError("r offsets must be finite");
    for (SubsolverMethod m : methods) {
      if (m == SubsolverMethod::FixedPoint && j < 0.0)
        throw ConfigError("fixed-point arms need r offsets >= 0");
      if (m == SubsolverMethod::Newton && !(j > 0.0))
        throw ConfigError("newton arms use r = offset, so offsets must be > 0");
    }
  }
  if (!(sigma >= 0.0) || !(sigma < 1.0))
    throw ConfigError("sigma must lie in [0, 1)");
  if (!(stop_tol > 0.0)) throw ConfigError("stop_tol must be positive");
  if (repetitions < 1) throw ConfigError("repetitions must be at least 1");
  if (max_outer_iters < 1) throw ConfigError("max_outer_iters must be at least 1");
  if (max_inner_iters < 1) throw ConfigError("max_inner_iters must be at least 1");
  if (threads < 1) throw ConfigError("threads must be at least 1");
  ranges.validate();
}

namespace {

// r for one arm: the fixed-point solver needs the contraction margin, the
// Newton solver takes the offset at face value.
double arm_r(SubsolverMethod method, double offset, double max_modulus) {
  return method == SubsolverMethod::FixedPoint ? max_modulus + 0.1 + offset : offset;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult result;

  struct CellStats {
    CellAggregate agg;
    double outer_sum = 0.0, inner_sum = 0.0, wall_sum = 0.0, r_sum = 0.0;
  };
  std::vector<CellStats> cells;

  for (int scenarios : config.scenario_counts) {
    for (const auto& [m1, m2] : config.dims) {
      for (int rep = 0; rep < config.repetitions; ++rep) {
        const std::uint64_t seed = derive_seed(
            config.master_seed,
            {static_cast<std::uint64_t>(scenarios), static_cast<std::uint64_t>(m1),
             static_cast<std::uint64_t>(m2), static_cast<std::uint64_t>(rep)});
        const SviInstance inst =
            assemble_instance(sample_params(seed, scenarios, m1, m2, config.ranges));
        const double max_modulus = inst.mapping.max_lipschitz_modulus();

        for (double offset : config.r_offsets) {
          for (SubsolverMethod method : config.methods) {
            HedgingParams params;
            params.r = arm_r(method, offset, max_modulus);
            params.sigma = config.sigma;
            params.stop_tol = config.stop_tol;
            params.max_outer_iters = config.max_outer_iters;
            params.threads = config.threads;

            SubsolverConfig sub;
            sub.method = method;
            sub.max_inner_iters = config.max_inner_iters;

            const auto t0 = std::chrono::steady_clock::now();
            const SolveResult run = solve(inst, params, sub);
            const auto t1 = std::chrono::steady_clock::now();

            RunRecord rec;
            rec.experiment = config.name;
            rec.cell_id = "s" + std::to_string(scenarios) + "-m" + std::to_string(m1) +
                          "x" + std::to_string(m2) + "-j" + format_double(offset);
            rec.seed = seed;
            rec.method = to_string(method);
            rec.scenarios = scenarios;
            rec.m1 = m1;
            rec.m2 = m2;
            rec.r = params.r;
            rec.sigma = config.sigma;
            rec.outer_iters = static_cast<long long>(run.history.size());
            rec.inner_iters_total = run.total_inner_iterations;
            rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            rec.stop_quantity = run.history.empty()
                                    ? std::numeric_limits<double>::quiet_NaN()
                                    : run.history.back().stop_quantity;
            rec.residual = run.final_residual.max();
            rec.status = to_string(run.status);
            result.records.push_back(rec);

            CellStats* cell = nullptr;
            for (CellStats& c : cells)
              if (c.agg.cell_id == rec.cell_id && c.agg.method == rec.method) {
                cell = &c;
                break;
              }
            if (!cell) {
              cells.emplace_back();
              cell = &cells.back();
              cell->agg.cell_id = rec.cell_id;
              cell->agg.method = rec.method;
              cell->agg.scenarios = scenarios;
              cell->agg.m1 = m1;
              cell->agg.m2 = m2;
            }
            ++cell->agg.runs;
            cell->r_sum += rec.r;
            if (run.status == SolveStatus::Converged) {
              ++cell->agg.converged;
              cell->outer_sum += static_cast<double>(rec.outer_iters);
              cell->inner_sum += static_cast<double>(rec.inner_iters_total);
              cell->wall_sum += rec.wall_ms;
            }
          }
        }
      }
    }
  }

  result.aggregates.reserve(cells.size());
  for (CellStats& c : cells) {
    c.agg.r_mean = c.r_sum / c.agg.runs;
    if (c.agg.converged > 0) {
      c.agg.mean_outer_iters = c.outer_sum / c.agg.converged;
      c.agg.mean_inner_iters = c.inner_sum / c.agg.converged;
      c.agg.mean_wall_ms = c.wall_sum / c.agg.converged;
    } else {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      c.agg.mean_outer_iters = nan;
      c.agg.mean_inner_iters = nan;
      c.agg.mean_wall_ms = nan;
    }
    result.aggregates.push_back(c.agg);
  }
  return result;
}

}  // namespace svi
