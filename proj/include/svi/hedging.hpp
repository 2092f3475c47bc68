#pragma once

#include "svi/common.hpp"
#include "svi/instance.hpp"
#include "svi/subsolvers.hpp"

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace svi {

// Parameters of the inexact progressive hedging loop.
//
// Each outer iteration solves the scenario subproblems inexactly, wraps the
// result in a certificate (x_hat, w_hat, delta), accepts it when
//   |delta|^2 <= sigma_k^2 (|x - P_N x_hat + P_M w_hat|^2
//                           + |x - P_N w_hat + P_M x_hat|^2),
// and then moves x along x - P_N(x_hat) and w along P_M(w_hat) with step
// tau_k * alpha_k.
struct HedgingParams {
  double r = 20.0;            // proximal parameter, > 0
  double sigma = 0.5;         // constant relative-error level, in [0, sigma_bar)
  double sigma_bar = 0.9;     // sup of admissible sigma_k, in (0, 1)
  double theta = 0.9;         // tau_k must stay in [1 - theta, 1 + theta]
  double tau = 1.0;           // constant relaxation factor
  std::function<double(int)> sigma_schedule;  // overrides sigma when set
  std::function<double(int)> tau_schedule;    // overrides tau when set

  double stop_tol = 1e-5;     // threshold on |x_k - P_N(w_hat) + P_M(x_hat)|
  long long max_outer_iters = 100000;

  // When the strengthened bound |delta| <= sigma_k |x - P_N w_hat + P_M x_hat|
  // holds (and sigma_k <= theta), apply the simplified update
  // x <- P_N(x_hat), w <- w + r P_M(w_hat), i.e. force tau_k alpha_k = 1.
  bool exact_mode_update = false;

  // Scale the inner residual target with the outer progress instead of
  // hitting SubsolverConfig::inner_tol every iteration; certificate
  // rejections still halve the current target either way.
  bool adaptive_inner_target = true;

  bool record_iterates = false;  // keep (x_k, w_k) snapshots in the result
  int threads = 1;               // parallelism across scenario subproblems

  double sigma_at(int k) const { return sigma_schedule ? sigma_schedule(k) : sigma; }
  double tau_at(int k) const { return tau_schedule ? tau_schedule(k) : tau; }
  void validate() const;
};

struct HedgingState {
  PolicyVector x;  // lives in the nonanticipativity subspace
  PolicyVector w;  // lives in the multiplier subspace
  int k = 0;
};

// Outcome of the relative-error test; truth plus both right-hand norms for
// logging.
struct ToleranceCheckResult {
  bool accepted = false;
  double delta_norm = 0.0;
  double direction_norm = 0.0;   // |x - P_N x_hat + P_M w_hat|
  double stop_quantity = 0.0;    // |x - P_N w_hat + P_M x_hat|
  explicit operator bool() const { return accepted; }
};

ToleranceCheckResult tolerance_check(const HedgingState& state, const Certificate& cert,
                                     double sigma_k, const ScenarioSpace& space);

// alpha_k = <x - P_N x_hat + P_M w_hat, x - P_N w_hat + P_M x_hat>
//           / |x - P_N x_hat + P_M w_hat|^2.
// Throws a degenerate-step IntegrityError when the denominator falls below
// (1e-13 (1 + |x|))^2; callers should re-check the stop condition then.  When
// sigma_for_bound is given and the strengthened error bound holds, the lower
// bound alpha_k >= 1/(1 + sigma_k) - 1e-9 is asserted.
double step_length(const HedgingState& state, const Certificate& cert,
                   const ScenarioSpace& space,
                   double sigma_for_bound = std::numeric_limits<double>::quiet_NaN());

// |x_k - P_N(w_hat) + P_M(x_hat)|: vanishes exactly at solutions.
double stop_quantity(const HedgingState& state, const Certificate& cert,
                     const ScenarioSpace& space);

// One update x <- x - tau alpha (x - P_N x_hat), w <- w + tau alpha r P_M(w_hat).
// Asserts that the new pair stays in its subspaces (1e-10 relative).
HedgingState advance(const HedgingState& state, const Certificate& cert, double tau,
                     double alpha, double r, const ScenarioSpace& space);

enum class SolveStatus { Converged, MaxIterations, SubsolverFailure, Diverged };
std::string to_string(SolveStatus status);

struct IterationRecord {
  int k = 0;
  double stop_quantity = 0.0;        // |x - P_N(w_hat) + P_M(x_hat)|
  double stop_quantity_minus = 0.0;  // |x - P_N(w_hat) - P_M(x_hat)| (diagnostic)
  double alt_stop_quantity = 0.0;    // |x - P_N(x_hat) - P_M(w_hat)| (diagnostic)
  double direction_norm = 0.0;       // |x - P_N(x_hat) + P_M(w_hat)|
  double delta_norm = 0.0;
  double sigma = 0.0;
  double alpha = 0.0;                // NaN on the terminal row
  double tau = 0.0;                  // effective tau (1/alpha in exact mode)
  long long inner_iterations = 0;
  int certificate_retries = 0;
  int fallback_sweeps = 0;
  double inner_target = 0.0;
  double nonanticipativity_error = 0.0;
  double multiplier_error = 0.0;
  double natural_residual = 0.0;
};

// Observer invoked once per outer iteration after the certificate is
// accepted, before the state is advanced.  Used by tests to re-verify
// certificates and iterate identities.
struct IterationView {
  const HedgingState& state;
  const Certificate& certificate;
  const IterationRecord& record;
};
using IterationObserver = std::function<void(const IterationView&)>;

struct SolveResult {
  PolicyVector x, w;
  SolveStatus status = SolveStatus::MaxIterations;
  std::vector<IterationRecord> history;
  ResidualReport final_residual;
  long long total_inner_iterations = 0;
  std::string diagnostic;
  // Populated when params.record_iterates is set: iterates[j] is the state
  // before iteration j; one extra trailing entry holds the final state.
  std::vector<PolicyVector> x_iterates, w_iterates;
};

// Runs the inexact progressive hedging loop from (x0, w0); zero policies by
// default.  Starting points are projected onto their subspaces when they do
// not already lie there (recorded in the diagnostic string).
SolveResult solve(const SviInstance& inst, const HedgingParams& params,
                  const SubsolverConfig& sub, PolicyVector x0 = {}, PolicyVector w0 = {},
                  const IterationObserver& observer = {});

}  // namespace svi
