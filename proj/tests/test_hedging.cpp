#include "doctest.h"

#include "support/oracles.hpp"
#include "svi/hedging.hpp"
#include "svi/nash_game.hpp"
#include "svi/rng.hpp"

#include <cmath>
#include <vector>

using namespace svi;
using namespace svi::testing;

namespace {

NashRanges micro_ranges() {
  NashRanges r;
  r.alpha1 = {0.2, 0.3};
  r.a1 = {8.0, 12.0};
  r.c1 = {0.8, 1.2};
  r.alpha2 = {2.0, 3.0};
  r.a2 = {0.02, 0.05};
  r.c2 = {2.5, 3.5};
  r.cap = {2.5, 3.5};
  return r;
}

SviInstance micro_instance(std::uint64_t seed, int scenarios) {
  return assemble_instance(sample_params(seed, scenarios, 1, 1, micro_ranges()));
}

// Collects the per-iteration views a solve run emits.
struct Trace {
  std::vector<PolicyVector> x, w;
  std::vector<Certificate> certs;
  std::vector<IterationRecord> records;

  IterationObserver observer() {
    return [this](const IterationView& view) {
      x.push_back(view.state.x);
      w.push_back(view.state.w);
      certs.push_back(view.certificate);
      records.push_back(view.record);
    };
  }
};

}  // namespace

TEST_CASE("tolerance check evaluates the relative-error inequality") {
  SviInstance inst = two_scenario_example();
  const ScenarioSpace& space = inst.space;
  Rng rng(50001);

  HedgingState state;
  state.x = project_nonanticipative(random_policy(rng, space, 1.0), space);
  state.w = project_multipliers(random_policy(rng, space, 1.0), space);

  SUBCASE("a zero-discrepancy certificate passes even at sigma = 0") {
    Certificate cert;
    cert.w_hat = random_policy(rng, space, 1.0);
    cert.x_hat = cert.w_hat;
    cert.delta = PolicyVector::zero(space);
    ToleranceCheckResult res = tolerance_check(state, cert, 0.0, space);
    CHECK(res.accepted);
    CHECK(bool(res));
    CHECK(res.delta_norm == 0.0);
  }

  SUBCASE("decisions agree with an independent recomputation") {
    for (int trial = 0; trial < 30; ++trial) {
      Certificate cert;
      cert.x_hat = random_policy(rng, space, 1.0);
      cert.w_hat = random_policy(rng, space, 1.0);
      cert.delta = PolicyVector{cert.w_hat.values - cert.x_hat.values};
      const double sigma = 0.5;
      ToleranceCheckResult res = tolerance_check(state, cert, sigma, space);

      PolicyVector n_xhat = naive_project_nonanticipative(cert.x_hat, space);
      PolicyVector n_what = naive_project_nonanticipative(cert.w_hat, space);
      PolicyVector dir{state.x.values - n_xhat.values +
                       (cert.w_hat.values - n_what.values)};
      PolicyVector gap{state.x.values - n_what.values +
                       (cert.x_hat.values - n_xhat.values)};
      const double dn = naive_norm(dir, space);
      const double gn = naive_norm(gap, space);
      const double deltan = naive_norm(cert.delta, space);
      CHECK(res.direction_norm == doctest::Approx(dn).epsilon(1e-12));
      CHECK(res.stop_quantity == doctest::Approx(gn).epsilon(1e-12));
      CHECK(res.accepted == (deltan * deltan <= sigma * sigma * (dn * dn + gn * gn)));
    }
  }

  SUBCASE("sigma outside [0, 1) is rejected") {
    Certificate cert;
    cert.x_hat = cert.w_hat = PolicyVector::zero(space);
    cert.delta = PolicyVector::zero(space);
    CHECK_THROWS_AS(tolerance_check(state, cert, 1.0, space), ParameterError);
    CHECK_THROWS_AS(tolerance_check(state, cert, -0.1, space), ParameterError);
  }
}

TEST_CASE("step length is one for exact certificates and guarded when degenerate") {
  SviInstance inst = two_scenario_example();
  const ScenarioSpace& space = inst.space;
  Rng rng(50002);
  HedgingState state;
  state.x = project_nonanticipative(random_policy(rng, space, 1.0), space);
  state.w = project_multipliers(random_policy(rng, space, 1.0), space);

  Certificate cert;
  cert.w_hat = random_policy(rng, space, 1.0);
  cert.x_hat = cert.w_hat;
  cert.delta = PolicyVector::zero(space);
  // delta = 0 makes direction and gap coincide, so alpha = 1; the
  // strengthened lower bound 1/(1 + sigma) is comfortably met.
  CHECK(step_length(state, cert, space) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(step_length(state, cert, space, 0.5) == doctest::Approx(1.0).epsilon(1e-12));

  // x_hat = w_hat = x in the subspace collapses the direction to zero.
  Certificate degenerate;
  degenerate.x_hat = state.x;
  degenerate.w_hat = state.x;
  degenerate.delta = PolicyVector::zero(space);
  CHECK_THROWS_AS(step_length(state, degenerate, space), IntegrityError);
}

TEST_CASE("both sign conventions of the stop quantity agree") {
  // The two summands of the stop vector live in orthogonal subspaces, so
  // flipping the sign of either leaves the norm unchanged.
  Rng rng(50003);
  for (int trial = 0; trial < 20; ++trial) {
    ScenarioSpace space = random_tree_space(rng, 3, 20);
    HedgingState state;
    state.x = project_nonanticipative(random_policy(rng, space, 2.0), space);
    state.w = project_multipliers(random_policy(rng, space, 2.0), space);
    Certificate cert;
    cert.x_hat = random_policy(rng, space, 2.0);
    cert.w_hat = random_policy(rng, space, 2.0);
    cert.delta = PolicyVector{cert.w_hat.values - cert.x_hat.values};

    const double plus = stop_quantity(state, cert, space);
    PolicyVector n_what = naive_project_nonanticipative(cert.w_hat, space);
    PolicyVector m_xhat{cert.x_hat.values -
                        naive_project_nonanticipative(cert.x_hat, space).values};
    PolicyVector minus{state.x.values - n_what.values - m_xhat.values};
    CHECK(plus == doctest::Approx(naive_norm(minus, space)).epsilon(1e-12));
  }
}

TEST_CASE("advance applies the two-space update and stays in the subspaces") {
  SviInstance inst = two_scenario_example();
  const ScenarioSpace& space = inst.space;
  Rng rng(50004);
  HedgingState state;
  state.x = project_nonanticipative(random_policy(rng, space, 1.0), space);
  state.w = project_multipliers(random_policy(rng, space, 1.0), space);
  state.k = 7;

  Certificate cert;
  cert.x_hat = random_policy(rng, space, 1.0);
  cert.w_hat = random_policy(rng, space, 1.0);
  cert.delta = PolicyVector{cert.w_hat.values - cert.x_hat.values};

  const double tau = 0.8, alpha = 0.9, r = 5.0;
  HedgingState next = advance(state, cert, tau, alpha, r, space);
  CHECK(next.k == 8);

  PolicyVector n_xhat = naive_project_nonanticipative(cert.x_hat, space);
  PolicyVector n_what = naive_project_nonanticipative(cert.w_hat, space);
  Matrix want_x =
      state.x.values - tau * alpha * (state.x.values - n_xhat.values);
  Matrix want_w = state.w.values +
                  tau * alpha * r * (cert.w_hat.values - n_what.values);
  CHECK(norm(PolicyVector{next.x.values - want_x}, space) <= 1e-10);
  CHECK(norm(PolicyVector{next.w.values - want_w}, space) <=
        1e-10 * (1.0 + norm(next.w, space)));

  // Memberships.
  CHECK(norm(project_multipliers(next.x, space), space) <= 1e-10);
  CHECK(norm(project_nonanticipative(next.w, space), space) <= 1e-10);

  CHECK_THROWS_AS(advance(state, cert, tau, 0.0, r, space), ParameterError);
}

TEST_CASE("the bundled two-scenario example converges to the known solution") {
  SviInstance inst = two_scenario_example();
  HedgingParams params;
  params.r = 5.0;
  SubsolverConfig sub;
  PolicyVector x0 = PolicyVector::constant(inst.space, 1.0);
  SolveResult res = solve(inst, params, sub, x0);
  CHECK(res.status == SolveStatus::Converged);
  CHECK(res.final_residual.max() <= 1e-6);
  // The limit solves the deterministic VI: with b >= 0 the origin does.
  CHECK(norm(res.x, inst.space) <= 1e-3);
  CHECK(norm(project_nonanticipative(res.w, inst.space), inst.space) <= 1e-8);
  CHECK(res.history.size() >= 1);
  CHECK(std::isnan(res.history.back().alpha));  // terminal row
}

TEST_CASE("solves are deterministic and thread-count invariant") {
  SviInstance inst = micro_instance(7001, 8);
  HedgingParams params;
  params.r = 10.0;
  params.stop_tol = 1e-3;
  SubsolverConfig sub;

  SolveResult a = solve(inst, params, sub);
  SolveResult b = solve(inst, params, sub);
  HedgingParams par4 = params;
  par4.threads = 4;
  SolveResult c = solve(inst, par4, sub);

  REQUIRE(a.history.size() == b.history.size());
  REQUIRE(a.history.size() == c.history.size());
  CHECK(a.x.values == b.x.values);
  CHECK(a.x.values == c.x.values);
  CHECK(a.w.values == c.w.values);
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].stop_quantity == b.history[i].stop_quantity);
    CHECK(a.history[i].stop_quantity == c.history[i].stop_quantity);
  }
  CHECK(a.total_inner_iterations == c.total_inner_iterations);
}

TEST_CASE("iterates travel along the single-vector recursion") {
  // Composite z = x + w/r: the two-space update collapses to
  // z+ = z - (tau alpha / r) vhat with vhat = r (x - P_N x_hat - P_M w_hat).
  SviInstance inst = micro_instance(7002, 6);
  const ScenarioSpace& space = inst.space;
  HedgingParams params;
  params.r = 10.0;
  params.stop_tol = 1e-4;
  SubsolverConfig sub;
  Trace trace;
  SolveResult res = solve(inst, params, sub, {}, {}, trace.observer());
  CHECK(res.status == SolveStatus::Converged);
  REQUIRE(trace.x.size() >= 3);

  const double r = params.r;
  for (std::size_t j = 0; j + 1 < trace.x.size(); ++j) {
    REQUIRE(std::isfinite(trace.records[j].alpha));
    const double scale = trace.records[j].tau * trace.records[j].alpha;
    PolicyVector n_xhat = naive_project_nonanticipative(trace.certs[j].x_hat, space);
    Matrix m_what = trace.certs[j].w_hat.values -
                    naive_project_nonanticipative(trace.certs[j].w_hat, space).values;
    Matrix vhat = r * (trace.x[j].values - n_xhat.values - m_what);

    Matrix z_now = trace.x[j].values + trace.w[j].values / r;
    Matrix z_next = trace.x[j + 1].values + trace.w[j + 1].values / r;
    Matrix predicted = z_now - (scale / r) * vhat;
    const double err = norm(PolicyVector{z_next - predicted}, space);
    CHECK(err <= 1e-12 * (1.0 + norm(PolicyVector{z_now}, space)));

    // The recorded diagnostic norm is |vhat| / r.
    CHECK(norm(PolicyVector{vhat}, space) / r ==
          doctest::Approx(trace.records[j].alt_stop_quantity).epsilon(1e-10));
  }
  // The terminal row is observed with the final state; nothing moves after it.
  CHECK(std::isnan(trace.records.back().alpha));
  CHECK(trace.x.back().values == res.x.values);
  CHECK(trace.w.back().values == res.w.values);

  // Every recorded row carries the numerically identical +/- stop norms.
  for (const IterationRecord& rec : res.history)
    CHECK(rec.stop_quantity ==
          doctest::Approx(rec.stop_quantity_minus).epsilon(1e-11));
}

TEST_CASE("near-exact proximal steps reproduce the classical recursion") {
  // tau alpha = 1 plus tiny inner targets turns the loop into the classical
  // method; compare against the independently coded recursion.
  for (std::uint64_t seed : {9001ull, 9002ull}) {
    SviInstance inst = micro_instance(seed, 6);
    const double r = 12.0;
    REQUIRE(inst.mapping.max_lipschitz_modulus() < r);

    HedgingParams params;
    params.r = r;
    params.exact_mode_update = true;
    params.adaptive_inner_target = false;
    params.record_iterates = true;
    params.stop_tol = 1e-12;
    params.max_outer_iters = 12;
    SubsolverConfig sub;
    sub.inner_tol = 1e-13;
    SolveResult res = solve(inst, params, sub);
    REQUIRE(res.status == SolveStatus::MaxIterations);
    REQUIRE(res.x_iterates.size() == 13);

    ExactRecursionResult oracle = exact_hedging_recursion(inst, r, 12);
    for (int j = 0; j <= 12; ++j) {
      const double ex = norm(
          PolicyVector{res.x_iterates[j].values - oracle.x_iterates[j].values},
          inst.space);
      const double ew = norm(
          PolicyVector{res.w_iterates[j].values - oracle.w_iterates[j].values},
          inst.space);
      CHECK(ex <= 1e-10);
      CHECK(ew <= 1e-10 * r);
    }
  }
}

TEST_CASE("adaptive inner targets converge to the same tolerance for less work") {
  SviInstance inst = micro_instance(7003, 8);
  HedgingParams params;
  params.r = 10.0;
  params.stop_tol = 1e-4;
  SubsolverConfig sub;
  sub.method = SubsolverMethod::FixedPoint;
  sub.inner_tol = 1e-11;

  SolveResult adaptive = solve(inst, params, sub);
  HedgingParams fixed = params;
  fixed.adaptive_inner_target = false;
  SolveResult exact = solve(inst, fixed, sub);

  CHECK(adaptive.status == SolveStatus::Converged);
  CHECK(exact.status == SolveStatus::Converged);
  CHECK(adaptive.final_residual.natural_residual <= 1e-2);
  CHECK(exact.final_residual.natural_residual <= 1e-2);
  CHECK(adaptive.total_inner_iterations < exact.total_inner_iterations);
}

TEST_CASE("a non-monotone push-away mapping trips the divergence guard") {
  // F(x) = -x - 1 on the half line: no solution, iterates run off to
  // infinity and the stop quantity grows past 10x its running minimum.
  SviInstance inst(ScenarioSpace::single_stage(Vector::Ones(1), 1),
                   AffineMapping({(Matrix(1, 1) << -1.0).finished()},
                                 {(Vector(1) << -1.0).finished()}),
                   ConstraintFamily::orthant(1, 1));
  CHECK_FALSE(check_monotone(inst).monotone);

  HedgingParams params;
  params.r = 2.0;
  SubsolverConfig sub;
  SolveResult res = solve(inst, params, sub);
  CHECK(res.status == SolveStatus::Diverged);
  CHECK(res.diagnostic.find("running minimum") != std::string::npos);
}

TEST_CASE("iteration budget exhaustion is reported, not hidden") {
  SviInstance inst = micro_instance(7004, 4);
  HedgingParams params;
  params.r = 10.0;
  params.max_outer_iters = 3;
  SubsolverConfig sub;
  SolveResult res = solve(inst, params, sub);
  CHECK(res.status == SolveStatus::MaxIterations);
  CHECK(res.history.size() == 3);
  for (const IterationRecord& rec : res.history) CHECK(std::isfinite(rec.alpha));
  CHECK(res.diagnostic.find("budget") != std::string::npos);
}

TEST_CASE("schedules are honored and validated per iteration") {
  SviInstance inst = micro_instance(7005, 4);
  SubsolverConfig sub;

  SUBCASE("valid schedules show up in the records") {
    HedgingParams params;
    params.r = 10.0;
    params.stop_tol = 1e-3;
    params.sigma_schedule = [](int k) { return k < 2 ? 0.8 : 0.4; };
    params.tau_schedule = [](int) { return 1.05; };
    SolveResult res = solve(inst, params, sub);
    CHECK(res.status == SolveStatus::Converged);
    REQUIRE(res.history.size() >= 3);
    CHECK(res.history[0].sigma == 0.8);
    CHECK(res.history[2].sigma == 0.4);
    CHECK(res.history[0].tau == 1.05);
  }
  SUBCASE("a sigma above sigma_bar is rejected at its iteration") {
    HedgingParams params;
    params.r = 10.0;
    params.sigma_schedule = [](int) { return 0.95; };
    CHECK_THROWS_AS(solve(inst, params, sub), ParameterError);
  }
  SUBCASE("a tau outside [1 - theta, 1 + theta] is rejected") {
    HedgingParams params;
    params.r = 10.0;
    params.tau_schedule = [](int) { return 2.0; };
    CHECK_THROWS_AS(solve(inst, params, sub), ParameterError);
  }
}

TEST_CASE("hedging parameter validation") {
  HedgingParams p;
  CHECK_NOTHROW(p.validate());
  SUBCASE("r") {
    p.r = 0.0;
    CHECK_THROWS_AS(p.validate(), ParameterError);
  }
  SUBCASE("sigma vs sigma_bar") {
    p.sigma = 0.9;
    CHECK_THROWS_AS(p.validate(), ParameterError);
  }
  SUBCASE("sigma_bar range") {
    p.sigma_bar = 1.0;
    CHECK_THROWS_AS(p.validate(), ParameterError);
  }
  SUBCASE("theta range") {
    p.theta = 0.0;
    CHECK_THROWS_AS(p.validate(), ParameterError);
  }
  SUBCASE("tau range") {
    p.tau = 0.05;  // below 1 - theta = 0.1
    CHECK_THROWS_AS(p.validate(), ParameterError);
  }
  SUBCASE("stop_tol") {
    p.stop_tol = 0.0;
    CHECK_THROWS_AS(p.validate(), ParameterError);
  }
  SUBCASE("threads") {
    p.threads = 0;
    CHECK_THROWS_AS(p.validate(), ParameterError);
  }
}

TEST_CASE("starting points outside their subspaces are projected and noted") {
  SviInstance inst = micro_instance(7006, 4);
  const ScenarioSpace& space = inst.space;
  Rng rng(50005);
  HedgingParams params;
  params.r = 10.0;
  params.stop_tol = 1e-3;
  SubsolverConfig sub;

  PolicyVector x0 = random_policy(rng, space, 1.0);  // not nonanticipative
  PolicyVector w0 = random_policy(rng, space, 1.0);  // nonzero mean
  SolveResult res = solve(inst, params, sub, x0, w0);
  CHECK(res.status == SolveStatus::Converged);
  CHECK(res.diagnostic.find("projected") != std::string::npos);

  PolicyVector wrong{Matrix::Zero(space.total_dim() + 1, space.scenario_count())};
  CHECK_THROWS_AS(solve(inst, params, sub, wrong), DimensionError);
}

TEST_CASE("iterate recording brackets the run") {
  SviInstance inst = micro_instance(7007, 4);
  HedgingParams params;
  params.r = 10.0;
  params.stop_tol = 1e-3;
  params.record_iterates = true;
  SubsolverConfig sub;
  SolveResult res = solve(inst, params, sub);
  REQUIRE(res.status == SolveStatus::Converged);
  REQUIRE(res.x_iterates.size() == res.history.size() + 1);
  REQUIRE(res.w_iterates.size() == res.x_iterates.size());
  CHECK(res.x_iterates.front().values == Matrix::Zero(inst.space.total_dim(), 4));
  CHECK(res.x_iterates.back().values == res.x.values);
  CHECK(res.w_iterates.back().values == res.w.values);
}
