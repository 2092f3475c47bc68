#include "svi/bench.hpp"
#include "svi/hedging.hpp"
#include "svi/io.hpp"
#include "svi/nash_game.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitSolveFailure = 2;
constexpr int kExitVerifyFailure = 3;

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    svi::write_text_file(path, text);
}

struct GenOptions {
  std::uint64_t seed = 1;
  int scenarios = 10;
  int m1 = 5, m2 = 5;
  bool counterexample = false;
  std::string output;
  svi::NashRanges ranges;
};

int run_gen(const GenOptions& opt) {
  svi::SviInstance inst =
      opt.counterexample
          ? svi::two_scenario_example()
          : svi::assemble_instance(svi::sample_params(opt.seed, opt.scenarios, opt.m1,
                                                      opt.m2, opt.ranges));
  write_or_print(opt.output, svi::instance_to_json(inst));
  if (!opt.output.empty() && opt.output != "-")
    std::cout << "wrote " << opt.output << " (" << inst.space.scenario_count()
              << " scenarios, dim " << inst.space.total_dim() << ")\n";
  return kExitOk;
}

struct SolveOptions {
  std::string instance_path;
  std::string output;
  std::string log_path;
  std::string method = "newton";
  double r = 0.0;  // 0 = pick the method default
  double sigma = 0.5;
  double tau = 1.0;
  double theta = 0.9;
  double stop_tol = 1e-5;
  double inner_tol = 1e-9;
  long long max_outer = 100000;
  long long max_inner = 1'000'000;
  int threads = 1;
  bool exact_mode = false;
  bool fixed_inner_target = false;
};

int run_solve(const SolveOptions& opt) {
  const svi::SviInstance inst =
      svi::instance_from_json(svi::read_text_file(opt.instance_path));

  svi::SubsolverConfig sub;
  sub.method = svi::method_from_string(opt.method);
  sub.inner_tol = opt.inner_tol;
  sub.max_inner_iters = opt.max_inner;

  svi::HedgingParams params;
  // Method defaults: the fixed-point solver needs r above every Lipschitz
  // modulus, the Newton solver has no such restriction.
  params.r = opt.r > 0.0 ? opt.r
             : sub.method == svi::SubsolverMethod::FixedPoint
                 ? inst.mapping.max_lipschitz_modulus() + 0.1
                 : 20.0;
  params.sigma = opt.sigma;
  params.tau = opt.tau;
  params.theta = opt.theta;
  params.stop_tol = opt.stop_tol;
  params.max_outer_iters = opt.max_outer;
  params.threads = opt.threads;
  params.exact_mode_update = opt.exact_mode;
  params.adaptive_inner_target = !opt.fixed_inner_target;

  const svi::SolveResult result = svi::solve(inst, params, sub);

  std::cout << "status:            " << svi::to_string(result.status) << "\n"
            << "outer iterations:  " << result.history.size() << "\n"
            << "inner iterations:  " << result.total_inner_iterations << "\n";
  if (!result.history.empty())
    std::cout << "stop quantity:     "
              << svi::format_double(result.history.back().stop_quantity) << "\n";
  std::cout << "residual (N/M/nat): "
            << svi::format_double(result.final_residual.nonanticipativity_error) << " "
            << svi::format_double(result.final_residual.multiplier_error) << " "
            << svi::format_double(result.final_residual.natural_residual) << "\n";
  if (!result.diagnostic.empty()) std::cout << "note: " << result.diagnostic << "\n";

  if (!opt.output.empty()) {
    svi::write_text_file(opt.output, svi::solution_to_json(result.x, result.w));
    std::cout << "solution written to " << opt.output << "\n";
  }
  if (!opt.log_path.empty()) {
    svi::write_text_file(opt.log_path, svi::history_to_csv(result.history));
    std::cout << "run log written to " << opt.log_path << "\n";
  }
  return result.status == svi::SolveStatus::Converged ? kExitOk : kExitSolveFailure;
}

struct VerifyOptions {
  std::string instance_path;
  std::string solution_path;
  double tol = 1e-6;
};

int run_verify(const VerifyOptions& opt) {
  const svi::SviInstance inst =
      svi::instance_from_json(svi::read_text_file(opt.instance_path));
  auto [x, w] = svi::solution_from_json(svi::read_text_file(opt.solution_path));
  svi::require_conformant(x, inst.space, "verify (x)");
  svi::require_conformant(w, inst.space, "verify (w)");

  const svi::ResidualReport report = svi::extensive_residual(inst, x, w);
  const bool pass = report.max() <= opt.tol;
  std::cout << "nonanticipativity error: "
            << svi::format_double(report.nonanticipativity_error) << "\n"
            << "multiplier error:        "
            << svi::format_double(report.multiplier_error) << "\n"
            << "natural residual:        "
            << svi::format_double(report.natural_residual) << "\n"
            << (pass ? "PASS" : "FAIL") << " at tolerance "
            << svi::format_double(opt.tol) << "\n";
  return pass ? kExitOk : kExitVerifyFailure;
}

struct BenchOptions {
  std::string config_path;
  std::string runs_path = "runs.csv";
  std::string aggregates_path = "aggregates.csv";
  std::string template_kind;
  int threads = 0;  // 0 = keep the config's value
};

svi::ExperimentConfig template_config(svi::ExperimentKind kind) {
  svi::ExperimentConfig c;
  c.kind = kind;
  c.sigma = 0.5;
  c.stop_tol = 1e-5;
  c.repetitions = 3;
  c.master_seed = 1;
  switch (kind) {
    case svi::ExperimentKind::ScenarioSweep:
      c.name = "scenario-sweep";
      c.scenario_counts = {10, 25, 50, 100};
      c.dims = {{10, 10}};
      c.r_offsets = {20.0};
      c.methods = {svi::SubsolverMethod::FixedPoint, svi::SubsolverMethod::Newton};
      break;
    case svi::ExperimentKind::DimensionSweep:
      c.name = "dimension-sweep";
      c.scenario_counts = {50};
      c.dims = {{5, 5}, {10, 10}, {15, 15}, {20, 20}, {25, 25}};
      c.r_offsets = {20.0};
      c.methods = {svi::SubsolverMethod::FixedPoint, svi::SubsolverMethod::Newton};
      break;
    case svi::ExperimentKind::RSweep:
      c.name = "r-sweep";
      c.scenario_counts = {50};
      c.dims = {{10, 10}};
      c.r_offsets = {4.0, 10.0, 20.0, 30.0, 50.0};
      c.methods = {svi::SubsolverMethod::Newton};
      break;
    case svi::ExperimentKind::SingleRun:
      c.name = "single-run";
      c.scenario_counts = {10};
      c.dims = {{5, 5}};
      c.r_offsets = {20.0};
      c.methods = {svi::SubsolverMethod::Newton};
      c.repetitions = 1;
      break;
  }
  return c;
}

int run_bench(const BenchOptions& opt) {
  if (!opt.template_kind.empty()) {
    const svi::ExperimentConfig c =
        template_config(svi::experiment_kind_from_string(opt.template_kind));
    write_or_print(opt.config_path, svi::experiment_to_json(c));
    return kExitOk;
  }
  if (opt.config_path.empty())
    throw svi::ConfigError("bench needs a config file (or --template to make one)");
  svi::ExperimentConfig config =
      svi::experiment_from_json(svi::read_text_file(opt.config_path));
  if (opt.threads > 0) config.threads = opt.threads;

  const svi::ExperimentResult result = svi::run_experiment(config);
  svi::write_text_file(opt.runs_path, svi::emit_csv(result.records));
  svi::write_text_file(opt.aggregates_path, svi::emit_aggregate_csv(result.aggregates));

  int failed = 0;
  for (const svi::RunRecord& r : result.records)
    if (r.status != "converged") ++failed;
  std::cout << result.records.size() << " runs (" << failed << " not converged), "
            << result.aggregates.size() << " cells\n"
            << "runs written to " << opt.runs_path << "\n"
            << "aggregates written to " << opt.aggregates_path << "\n";
  return failed == 0 ? kExitOk : kExitSolveFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solver and benchmark harness for multistage stochastic variational "
               "inequalities via inexact progressive hedging"};
  app.require_subcommand(1);

  GenOptions gen;
  CLI::App* gen_cmd = app.add_subcommand(
      "gen", "Sample a two-stage Nash instance and write it as JSON");
  gen_cmd->add_option("--seed", gen.seed, "Instance seed");
  gen_cmd->add_option("-s,--scenarios", gen.scenarios, "Number of scenarios");
  gen_cmd->add_option("--m1", gen.m1, "Products of player 1");
  gen_cmd->add_option("--m2", gen.m2, "Products of player 2");
  gen_cmd->add_flag("--counterexample", gen.counterexample,
                    "Emit the fixed two-scenario example instead of sampling");
  gen_cmd->add_option("-o,--output", gen.output, "Output path ('-' = stdout)");
  auto add_range = [gen_cmd](const std::string& flag, std::array<double, 2>& slot,
                             const std::string& help) {
    gen_cmd->add_option(flag, slot, help);
  };
  add_range("--alpha1-range", gen.ranges.alpha1, "Stage-1 price sensitivity interval");
  add_range("--a1-range", gen.ranges.a1, "Stage-1 demand intercept interval");
  add_range("--c1-range", gen.ranges.c1, "Stage-1 unit cost interval");
  add_range("--alpha2-range", gen.ranges.alpha2, "Stage-2 price sensitivity interval");
  add_range("--a2-range", gen.ranges.a2, "Stage-2 demand intercept interval");
  add_range("--c2-range", gen.ranges.c2, "Stage-2 unit cost interval");
  add_range("--cap-range", gen.ranges.cap, "Capacity interval");

  SolveOptions solve;
  CLI::App* solve_cmd =
      app.add_subcommand("solve", "Solve an instance file, write solution and run log");
  solve_cmd->add_option("instance", solve.instance_path, "Instance JSON file")
      ->required();
  solve_cmd->add_option("-o,--output", solve.output, "Solution JSON path");
  solve_cmd->add_option("--log", solve.log_path, "Per-iteration CSV log path");
  solve_cmd->add_option("--method", solve.method, "Subsolver: newton or fixed-point")
      ->check(CLI::IsMember({"newton", "fixed-point"}));
  solve_cmd->add_option("-r", solve.r,
                        "Proximal parameter (default: 20 for newton, max modulus + 0.1 "
                        "for fixed-point)");
  solve_cmd->add_option("--sigma", solve.sigma, "Relative error level in [0, 1)");
  solve_cmd->add_option("--tau", solve.tau, "Relaxation factor");
  solve_cmd->add_option("--theta", solve.theta, "Relaxation corridor half-width");
  solve_cmd->add_option("--stop-tol", solve.stop_tol, "Outer stopping tolerance");
  solve_cmd->add_option("--inner-tol", solve.inner_tol, "Inner residual target");
  solve_cmd->add_option("--max-outer", solve.max_outer, "Outer iteration budget");
  solve_cmd->add_option("--max-inner", solve.max_inner,
                        "Inner iteration budget per scenario solve");
  solve_cmd->add_option("-t,--threads", solve.threads, "Scenario-level parallelism");
  solve_cmd->add_flag("--exact-mode", solve.exact_mode,
                      "Use the simplified update when the strengthened bound holds");
  solve_cmd->add_flag("--fixed-inner-target", solve.fixed_inner_target,
                      "Always solve subproblems to --inner-tol (no adaptive target)");

  VerifyOptions verify;
  CLI::App* verify_cmd = app.add_subcommand(
      "verify", "Check a solution file against an instance file");
  verify_cmd->add_option("instance", verify.instance_path, "Instance JSON file")
      ->required();
  verify_cmd->add_option("solution", verify.solution_path, "Solution JSON file")
      ->required();
  verify_cmd->add_option("--tol", verify.tol, "Pass/fail tolerance");

  BenchOptions bench;
  CLI::App* bench_cmd =
      app.add_subcommand("bench", "Run an experiment campaign and emit CSV tables");
  bench_cmd->add_option("config", bench.config_path,
                        "Experiment JSON file (with --template: where to write it)");
  bench_cmd->add_option("-o,--runs", bench.runs_path, "Run records CSV path");
  bench_cmd->add_option("--aggregates", bench.aggregates_path, "Aggregates CSV path");
  bench_cmd->add_option("--template", bench.template_kind,
                        "Write a default config for this kind instead of running")
      ->check(CLI::IsMember(
          {"scenario-sweep", "dimension-sweep", "r-sweep", "single-run"}));
  bench_cmd->add_option("-t,--threads", bench.threads,
                        "Override the config's scenario-level parallelism");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen_cmd->parsed()) return run_gen(gen);
    if (solve_cmd->parsed()) return run_solve(solve);
    if (verify_cmd->parsed()) return run_verify(verify);
    return run_bench(bench);
  } catch (const svi::BudgetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolveFailure;
  } catch (const svi::IntegrityError& e) {
    std::cerr << "internal inconsistency: " << e.what() << "\n";
    return kExitSolveFailure;
  } catch (const svi::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
