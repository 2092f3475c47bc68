#include "svi/hedging.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace svi {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs fn(0..count-1); scenarios are independent, results land in
// caller-owned slots, and each scenario's computation is sequential, so the
// outcome does not depend on the thread count.
void for_each_scenario(int count, int threads, const std::function<void(int)>& fn) {
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (int s = 0; s < count; ++s) fn(s);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const int s = next.fetch_add(1);
      if (s >= count) return;
      try {
        fn(s);
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// The four projection combinations every per-iteration quantity is built
// from.  direction = x - P_N(x_hat) + P_M(w_hat) drives the update; gap =
// x - P_N(w_hat) + P_M(x_hat) is the stop quantity.
struct CertGeometry {
  PolicyVector direction, gap;
  double direction_norm = 0.0, gap_norm = 0.0, delta_norm = 0.0;
  double minus_sign_norm = 0.0;  // |x - P_N(w_hat) - P_M(x_hat)|
  double alt_norm = 0.0;         // |x - P_N(x_hat) - P_M(w_hat)|
};

CertGeometry make_geometry(const HedgingState& state, const Certificate& cert,
                           const ScenarioSpace& space) {
  PolicyVector n_xhat = project_nonanticipative(cert.x_hat, space);
  PolicyVector n_what = project_nonanticipative(cert.w_hat, space);
  Matrix m_xhat = cert.x_hat.values - n_xhat.values;  // P_M(x_hat)
  Matrix m_what = cert.w_hat.values - n_what.values;  // P_M(w_hat)

  CertGeometry g;
  g.direction = PolicyVector{state.x.values - n_xhat.values + m_what};
  g.gap = PolicyVector{state.x.values - n_what.values + m_xhat};
  g.direction_norm = norm(g.direction, space);
  g.gap_norm = norm(g.gap, space);
  g.delta_norm = norm(cert.delta, space);
  g.minus_sign_norm = norm(PolicyVector{state.x.values - n_what.values - m_xhat}, space);
  g.alt_norm = norm(PolicyVector{state.x.values - n_xhat.values - m_what}, space);
  return g;
}

double alpha_from(const CertGeometry& g, const HedgingState& state,
                  const ScenarioSpace& space, double sigma_for_bound) {
  const double denom = inner_product(g.direction, g.direction, space);
  // Noise floor for the squared norm: the direction is assembled from
  // quantities of size |x|, so anything below (1e-13 (1 + |x|))^2 is
  // indistinguishable from rounding.
  const double x_norm = norm(state.x, space);
  const double floor = 1e-13 * (1.0 + x_norm);
  if (denom < floor * floor)
    throw IntegrityError("degenerate step: |x - P_N(x_hat) + P_M(w_hat)|^2 is at noise "
                         "level; re-check the stop condition before advancing");
  const double alpha = inner_product(g.direction, g.gap, space) / denom;
  if (std::isfinite(sigma_for_bound) && g.delta_norm <= sigma_for_bound * g.gap_norm) {
    const double bound = 1.0 / (1.0 + sigma_for_bound) - 1e-9;
    if (alpha < bound)
      throw IntegrityError("step length " + std::to_string(alpha) +
                           " violates the lower bound " + std::to_string(bound) +
                           " implied by the strengthened error test");
  }
  return alpha;
}

// Each multiplier increment is a projection onto the multiplier subspace up
// to rounding, and the increments carry a factor r; over long runs the
// leftover nonanticipative residue random-walks far enough above epsilon to
// matter.  Removing it after every update keeps the membership invariant at
// single-step rounding level regardless of run length.
PolicyVector clean_multiplier(PolicyVector w, const ScenarioSpace& space) {
  PolicyVector leak = project_nonanticipative(w, space);
  w.values -= leak.values;
  return w;
}

void check_memberships(const PolicyVector& x, const PolicyVector& w,
                       const ScenarioSpace& space, int k) {
  PolicyVector nx = project_nonanticipative(x, space);
  const double drift_x = norm(PolicyVector{x.values - nx.values}, space);
  if (drift_x > 1e-10 * (1.0 + norm(x, space)))
    throw IntegrityError("iterate left the nonanticipativity subspace at iteration " +
                         std::to_string(k) + " (drift " + std::to_string(drift_x) + ")");
  const double drift_w = norm(project_nonanticipative(w, space), space);
  if (drift_w > 1e-10 * (1.0 + norm(w, space)))
    throw IntegrityError("multiplier left its subspace at iteration " +
                         std::to_string(k) + " (drift " + std::to_string(drift_w) + ")");
}

}  // namespace

void HedgingParams::validate() const {
  if (!(r > 0.0)) throw ParameterError("r must be positive, got " + std::to_string(r));
  if (!(sigma_bar > 0.0) || !(sigma_bar < 1.0))
    throw ParameterError("sigma_bar must lie in (0, 1), got " + std::to_string(sigma_bar));
  if (!sigma_schedule && (!(sigma >= 0.0) || !(sigma < sigma_bar)))
    throw ParameterError("sigma must lie in [0, sigma_bar), got " + std::to_string(sigma));
  if (!(theta > 0.0) || !(theta < 1.0))
    throw ParameterError("theta must lie in (0, 1), got " + std::to_string(theta));
  if (!tau_schedule && (tau < 1.0 - theta || tau > 1.0 + theta))
    throw ParameterError("tau must lie in [1 - theta, 1 + theta], got " + std::to_string(tau));
  if (!(stop_tol > 0.0))
    throw ParameterError("stop_tol must be positive, got " + std::to_string(stop_tol));
  if (max_outer_iters < 1) throw ParameterError("max_outer_iters must be at least 1");
  if (threads < 1) throw ParameterError("threads must be at least 1");
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max-iters";
    case SolveStatus::SubsolverFailure: return "subsolver-failure";
    case SolveStatus::Diverged: return "diverged";
  }
  return "unknown";
}

ToleranceCheckResult tolerance_check(const HedgingState& state, const Certificate& cert,
                                     double sigma_k, const ScenarioSpace& space) {
  if (!(sigma_k >= 0.0) || !(sigma_k < 1.0))
    throw ParameterError("tolerance_check needs sigma_k in [0, 1), got " +
                         std::to_string(sigma_k));
  const CertGeometry g = make_geometry(state, cert, space);
  ToleranceCheckResult out;
  out.delta_norm = g.delta_norm;
  out.direction_norm = g.direction_norm;
  out.stop_quantity = g.gap_norm;
  const double rhs = sigma_k * sigma_k *
                     (g.direction_norm * g.direction_norm + g.gap_norm * g.gap_norm);
  out.accepted = g.delta_norm * g.delta_norm <= rhs;
  return out;
}

double step_length(const HedgingState& state, const Certificate& cert,
                   const ScenarioSpace& space, double sigma_for_bound) {
  return alpha_from(make_geometry(state, cert, space), state, space, sigma_for_bound);
}

double stop_quantity(const HedgingState& state, const Certificate& cert,
                     const ScenarioSpace& space) {
  return make_geometry(state, cert, space).gap_norm;
}

HedgingState advance(const HedgingState& state, const Certificate& cert, double tau,
                     double alpha, double r, const ScenarioSpace& space) {
  if (!(alpha > 0.0))
    throw ParameterError("advance needs a positive step length, got " +
                         std::to_string(alpha));
  PolicyVector n_xhat = project_nonanticipative(cert.x_hat, space);
  PolicyVector n_what = project_nonanticipative(cert.w_hat, space);
  const double scale = tau * alpha;
  HedgingState next;
  next.x = PolicyVector{state.x.values - scale * (state.x.values - n_xhat.values)};
  next.w = clean_multiplier(
      PolicyVector{state.w.values + scale * r * (cert.w_hat.values - n_what.values)},
      space);
  next.k = state.k + 1;
  check_memberships(next.x, next.w, space, next.k);
  return next;
}

SolveResult solve(const SviInstance& inst, const HedgingParams& params,
                  const SubsolverConfig& sub, PolicyVector x0, PolicyVector w0,
                  const IterationObserver& observer) {
  params.validate();
  sub.validate();
  const ScenarioSpace& space = inst.space;
  const int scenario_count = space.scenario_count();
  const double mu_max = inst.mapping.max_lipschitz_modulus();

  // The fixed-point subsolver iterates a map with Lipschitz constant
  // mu_xi / r, so it only contracts when r exceeds every scenario modulus.
  // Reject the configuration up front instead of grinding forever.
  if (sub.method == SubsolverMethod::FixedPoint && params.r <= mu_max)
    throw ParameterError("fixed-point subproblems need r > max scenario modulus " +
                         std::to_string(mu_max) + ", got r = " + std::to_string(params.r));

  SolveResult result;

  if (x0.values.size() == 0) x0 = PolicyVector::zero(space);
  if (w0.values.size() == 0) w0 = PolicyVector::zero(space);
  require_conformant(x0, space, "solve (x0)");
  require_conformant(w0, space, "solve (w0)");
  {
    PolicyVector nx = project_nonanticipative(x0, space);
    if (norm(PolicyVector{x0.values - nx.values}, space) > 1e-10 * (1.0 + norm(x0, space))) {
      x0 = std::move(nx);
      result.diagnostic += "x0 was projected onto the nonanticipativity subspace; ";
    }
    if (norm(project_nonanticipative(w0, space), space) >
        1e-10 * (1.0 + norm(w0, space))) {
      w0 = project_multipliers(w0, space);
      result.diagnostic += "w0 was projected onto the multiplier subspace; ";
    }
  }

  HedgingState state{std::move(x0), std::move(w0), 0};
  // Warm starts: each scenario's subproblem starts from the previous
  // accepted w_hat (the current iterate before the first iteration).
  PolicyVector warm = state.x;

  double running_min = std::numeric_limits<double>::infinity();
  int divergence_streak = 0;
  double last_gap = kNaN;          // previous iteration's stop quantity
  double last_target = kNaN;       // previous accepted inner target
  const double target_floor = 1e-3 * std::numeric_limits<double>::epsilon();
  const int max_retries = 80;

  auto record_snapshot = [&](const HedgingState& st) {
    if (params.record_iterates) {
      result.x_iterates.push_back(st.x);
      result.w_iterates.push_back(st.w);
    }
  };

  while (true) {
    if (state.k >= params.max_outer_iters) {
      result.status = SolveStatus::MaxIterations;
      result.diagnostic += "outer iteration budget (" +
                           std::to_string(params.max_outer_iters) + ") exhausted";
      break;
    }
    const int k = state.k;
    const double sigma_k = params.sigma_at(k);
    if (!(sigma_k >= 0.0) || !(sigma_k < params.sigma_bar))
      throw ParameterError("sigma schedule produced " + std::to_string(sigma_k) +
                           " outside [0, sigma_bar) at iteration " + std::to_string(k));

    SubproblemContext ctx{inst, state.x, state.w, params.r};

    // Choose this iteration's inner residual target.
    double target = sub.inner_tol;
    if (params.adaptive_inner_target) {
      if (std::isnan(last_gap)) {
        // First iteration: seed from the warm start's own residual.
        double initial = 0.0;
        for (int s = 0; s < scenario_count; ++s) {
          const double res =
              (proximal_map(ctx, s, warm.values.col(s)).value - warm.values.col(s)).norm();
          initial = std::max(initial, res);
        }
        target = std::max(initial / 4.0, target_floor);
      } else {
        const double shrink = mu_max > 0.0 ? std::min(params.r / mu_max, 1.0) : 1.0;
        double predictor = 0.25 * std::max(sigma_k, 1e-3) * shrink * last_gap;
        if (!std::isnan(last_target)) predictor = std::min(predictor, 4.0 * last_target);
        target = std::max(predictor, target_floor);
      }
    }

    // Solve all scenarios to the target, then test the certificate; on
    // rejection halve the target and resume from the current inner iterates.
    Certificate cert;
    CertGeometry geom;
    long long inner_this_iter = 0;
    int retries = 0;
    int fallbacks = 0;
    bool accepted = false;
    std::string failure;
    while (!accepted) {
      std::vector<ScenarioSolveStats> stats(scenario_count);
      try {
        for_each_scenario(scenario_count, params.threads, [&](int s) {
          ScenarioSolveResult r =
              sub.method == SubsolverMethod::FixedPoint
                  ? fixed_point_solve_from(ctx, s, warm.values.col(s), target, sub)
                  : newton_solve_from(ctx, s, warm.values.col(s), target, sub);
          warm.values.col(s) = r.z;
          stats[s] = r.stats;
        });
      } catch (const Error& e) {
        failure = e.what();
        break;
      }
      for (const auto& st : stats) {
        inner_this_iter += st.iterations;
        fallbacks += st.fallback_sweeps;
      }
      cert = build_certificate(ctx, warm);
      geom = make_geometry(state, cert, space);
      const double rhs = sigma_k * sigma_k * (geom.direction_norm * geom.direction_norm +
                                              geom.gap_norm * geom.gap_norm);
      if (geom.delta_norm * geom.delta_norm <= rhs) {
        accepted = true;
      } else {
        if (++retries > max_retries) {
          failure = "certificate still rejected after " + std::to_string(max_retries) +
                    " target halvings (|delta| = " + std::to_string(geom.delta_norm) + ")";
          break;
        }
        target = std::max(target / 2.0, std::numeric_limits<double>::min());
      }
    }
    result.total_inner_iterations += inner_this_iter;
    if (!accepted) {
      result.status = SolveStatus::SubsolverFailure;
      result.diagnostic += failure;
      break;
    }
    last_target = target;
    // Next iteration's subproblems start from this certificate's w_hat.
    warm = cert.w_hat;

    const ResidualReport res_now = extensive_residual(inst, state.x, state.w);
    IterationRecord rec;
    rec.k = k;
    rec.stop_quantity = geom.gap_norm;
    rec.stop_quantity_minus = geom.minus_sign_norm;
    rec.alt_stop_quantity = geom.alt_norm;
    rec.direction_norm = geom.direction_norm;
    rec.delta_norm = geom.delta_norm;
    rec.sigma = sigma_k;
    rec.alpha = kNaN;
    rec.tau = kNaN;
    rec.inner_iterations = inner_this_iter;
    rec.certificate_retries = retries;
    rec.fallback_sweeps = fallbacks;
    rec.inner_target = target;
    rec.nonanticipativity_error = res_now.nonanticipativity_error;
    rec.multiplier_error = res_now.multiplier_error;
    rec.natural_residual = res_now.natural_residual;

    last_gap = geom.gap_norm;
    record_snapshot(state);

    if (geom.gap_norm <= params.stop_tol) {
      result.history.push_back(rec);
      if (observer) observer(IterationView{state, cert, result.history.back()});
      result.status = SolveStatus::Converged;
      break;
    }

    // Divergence guard: a stop quantity stuck an order of magnitude above
    // its running minimum signals a non-convergent run.
    if (geom.gap_norm > 10.0 * running_min) {
      if (++divergence_streak >= 50) {
        result.history.push_back(rec);
        if (observer) observer(IterationView{state, cert, result.history.back()});
        result.status = SolveStatus::Diverged;
        result.diagnostic += "stop quantity " + std::to_string(geom.gap_norm) +
                             " stayed 10x above its running minimum " +
                             std::to_string(running_min) + " for 50 iterations";
        break;
      }
    } else {
      divergence_streak = 0;
    }
    running_min = std::min(running_min, geom.gap_norm);

    double alpha;
    try {
      alpha = alpha_from(geom, state, space, sigma_k);
    } catch (const IntegrityError& e) {
      // The stop condition was already checked above and did not fire.
      result.history.push_back(rec);
      result.status = SolveStatus::SubsolverFailure;
      result.diagnostic += e.what();
      break;
    }
    const bool strengthened = geom.delta_norm <= sigma_k * geom.gap_norm;
    double tau = params.tau_at(k);
    if (tau < 1.0 - params.theta || tau > 1.0 + params.theta)
      throw ParameterError("tau schedule produced " + std::to_string(tau) +
                           " outside [1 - theta, 1 + theta] at iteration " +
                           std::to_string(k));

    PolicyVector n_xhat = project_nonanticipative(cert.x_hat, space);
    PolicyVector n_what = project_nonanticipative(cert.w_hat, space);
    HedgingState next;
    next.k = k + 1;
    if (params.exact_mode_update && strengthened && sigma_k <= params.theta) {
      // tau_k alpha_k = 1: the update collapses to the classical one.
      next.x = n_xhat;
      next.w = clean_multiplier(
          PolicyVector{state.w.values +
                       params.r * (cert.w_hat.values - n_what.values)},
          space);
      tau = 1.0 / alpha;
    } else {
      const double scale = tau * alpha;
      next.x = PolicyVector{state.x.values - scale * (state.x.values - n_xhat.values)};
      next.w = clean_multiplier(
          PolicyVector{state.w.values +
                       scale * params.r * (cert.w_hat.values - n_what.values)},
          space);
    }
    rec.alpha = alpha;
    rec.tau = tau;
    result.history.push_back(rec);
    if (observer) observer(IterationView{state, cert, result.history.back()});

    check_memberships(next.x, next.w, space, next.k);
    state = std::move(next);
  }

  record_snapshot(state);
  result.final_residual = extensive_residual(inst, state.x, state.w);
  result.x = std::move(state.x);
  result.w = std::move(state.w);
  return result;
}

}  // namespace svi
