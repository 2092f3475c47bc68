#pragma once

#include "svi/common.hpp"
#include "svi/instance.hpp"

#include <optional>

namespace svi {

enum class SubsolverMethod { FixedPoint, Newton };

struct NewtonOptions {
  double backtrack_factor = 0.5;   // step shrink per line-search trial
  double min_step = 1e-12;         // below this the step falls back to a sweep
  double sufficient_decrease = 1e-4;
  double regularization = 1e-8;    // diagonal shift applied on a singular solve
};

struct SubsolverConfig {
  SubsolverMethod method = SubsolverMethod::Newton;
  double inner_tol = 1e-9;         // per-scenario fixed-point residual target
  long long max_inner_iters = 1'000'000;
  NewtonOptions newton;

  void validate() const;
};

// The frozen outer data one proximal subproblem is solved against.
struct SubproblemContext {
  const SviInstance& instance;
  const PolicyVector& x;  // current nonanticipative iterate
  const PolicyVector& w;  // current multiplier iterate
  double r;               // proximal parameter, > 0
};

// Value and pre-projection argument of the per-scenario proximal map
//   Phi(z) = P_C( x(xi) - w(xi)/r - F(z, xi)/r ).
// A fixed point of Phi solves the scenario's proximal inclusion.
struct ProximalMapResult {
  Vector value;
  Vector preimage;
};
ProximalMapResult proximal_map(const SubproblemContext& ctx, int scenario,
                               const Eigen::Ref<const Vector>& z);

struct ScenarioSolveStats {
  long long iterations = 0;
  double residual = 0.0;            // final one-step / natural residual
  int fallback_sweeps = 0;          // Newton steps replaced by a plain sweep
  double max_contraction_ratio = 0.0;  // successive residual ratios (fixed point)
};

struct ScenarioSolveResult {
  Vector z;
  ScenarioSolveStats stats;
};

// Fixed-point iteration z <- Phi(z) from z0 = x(xi).  Requires r strictly
// above the scenario's Lipschitz modulus (rejected up front otherwise) and
// stops when the one-step residual drops to cfg.inner_tol.
ScenarioSolveResult fixed_point_solve(const SubproblemContext& ctx, int scenario,
                                      const SubsolverConfig& cfg);

// Damped semismooth Newton on G(z) = z - Phi(z), using one Clarke element
// V = I + (1/r) J_P M per step and backtracking on |G|.  No restriction on
// r beyond positivity; requires a piecewise-affine constraint projection.
ScenarioSolveResult newton_solve(const SubproblemContext& ctx, int scenario,
                                 const SubsolverConfig& cfg);

// Variants with an explicit start and residual target, used by the outer
// loop for warm starts and adaptive targets.  Budget overruns surface as
// BudgetError carrying the scenario index and last residual.
ScenarioSolveResult fixed_point_solve_from(const SubproblemContext& ctx, int scenario,
                                           Vector z0, double target,
                                           const SubsolverConfig& cfg);
ScenarioSolveResult newton_solve_from(const SubproblemContext& ctx, int scenario,
                                      Vector z0, double target,
                                      const SubsolverConfig& cfg);

// An inexact proximal step packaged for the outer loop's error test:
//   w_hat(xi) = Phi(z)(xi)
//   x_hat(xi) = w_hat(xi) + (F(z,xi) - F(w_hat,xi)) / r
//   delta     = w_hat - x_hat
// By the projection's normal-cone property the proximal inclusion holds
// exactly at (x_hat, w_hat); delta measures how far z was from a fixed point.
struct Certificate {
  PolicyVector x_hat;
  PolicyVector w_hat;
  PolicyVector delta;
};
Certificate build_certificate(const SubproblemContext& ctx, const PolicyVector& z);

}  // namespace svi
