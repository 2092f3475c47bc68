#include "svi/subsolvers.hpp"

#include <cmath>
#include <string>

namespace svi {

void SubsolverConfig::validate() const {
  if (!(inner_tol > 0.0))
    throw ParameterError("inner_tol must be positive, got " + std::to_string(inner_tol));
  if (max_inner_iters < 1) throw ParameterError("max_inner_iters must be at least 1");
  if (!(newton.backtrack_factor > 0.0) || !(newton.backtrack_factor < 1.0))
    throw ParameterError("backtrack_factor must lie in (0, 1)");
  if (!(newton.min_step > 0.0) || !(newton.sufficient_decrease > 0.0) ||
      !(newton.regularization >= 0.0))
    throw ParameterError("newton options must be positive");
}

ProximalMapResult proximal_map(const SubproblemContext& ctx, int scenario,
                               const Eigen::Ref<const Vector>& z) {
  if (!(ctx.r > 0.0))
    throw ParameterError("proximal map requires r > 0, got " + std::to_string(ctx.r));
  ProximalMapResult out;
  out.preimage = ctx.x.values.col(scenario) - ctx.w.values.col(scenario) / ctx.r -
                 ctx.instance.mapping.evaluate(scenario, z) / ctx.r;
  out.value = ctx.instance.constraints.project(scenario, out.preimage);
  return out;
}

namespace {

[[noreturn]] void throw_budget(const char* method, int scenario, long long budget,
                               double residual, double target) {
  throw BudgetError(std::string(method) + " budget of " + std::to_string(budget) +
                    " iterations exhausted at scenario " + std::to_string(scenario) +
                    " (residual " + std::to_string(residual) + ", target " +
                    std::to_string(target) + ")");
}

}  // namespace

ScenarioSolveResult fixed_point_solve_from(const SubproblemContext& ctx, int scenario,
                                           Vector z0, double target,
                                           const SubsolverConfig& cfg) {
  const double mu = ctx.instance.mapping.lipschitz_modulus(scenario);
  if (!(ctx.r > mu))
    throw ConfigError("fixed-point iteration contracts only for r above the Lipschitz "
                      "modulus: scenario " + std::to_string(scenario) + " has modulus " +
                      std::to_string(mu) + ", got r = " + std::to_string(ctx.r));
  ScenarioSolveResult out;
  out.z = std::move(z0);
  double prev_res = -1.0;
  for (long long j = 0; j < cfg.max_inner_iters; ++j) {
    Vector next = proximal_map(ctx, scenario, out.z).value;
    const double res = (next - out.z).norm();
    // Successive-residual ratios stay below mu/r in exact arithmetic; skip
    // the regime where both sit at roundoff level.
    if (prev_res > 1e-12)
      out.stats.max_contraction_ratio = std::max(out.stats.max_contraction_ratio, res / prev_res);
    prev_res = res;
    out.z = std::move(next);
    out.stats.iterations = j + 1;
    out.stats.residual = res;
    if (res <= target) return out;
  }
  throw_budget("fixed-point", scenario, cfg.max_inner_iters, out.stats.residual, target);
}

ScenarioSolveResult fixed_point_solve(const SubproblemContext& ctx, int scenario,
                                      const SubsolverConfig& cfg) {
  cfg.validate();
  return fixed_point_solve_from(ctx, scenario, ctx.x.values.col(scenario),
                                cfg.inner_tol, cfg);
}

ScenarioSolveResult newton_solve_from(const SubproblemContext& ctx, int scenario,
                                      Vector z0, double target,
                                      const SubsolverConfig& cfg) {
  if (!ctx.instance.constraints.piecewise_affine())
    throw ConfigError("semismooth Newton needs a piecewise-affine constraint projection; "
                      "scenario " + std::to_string(scenario) + " uses a custom one");
  if (!(ctx.r > 0.0))
    throw ParameterError("semismooth Newton requires r > 0, got " + std::to_string(ctx.r));

  const Matrix& m = ctx.instance.mapping.matrix(scenario);
  const Index n = m.rows();
  const NewtonOptions& opts = cfg.newton;

  ScenarioSolveResult out;
  out.z = std::move(z0);
  ProximalMapResult pm = proximal_map(ctx, scenario, out.z);
  Vector g = out.z - pm.value;
  double gn = g.norm();
  out.stats.residual = gn;

  while (gn > target) {
    if (out.stats.iterations >= cfg.max_inner_iters)
      throw_budget("newton", scenario, cfg.max_inner_iters, gn, target);

    // One Clarke element of G(z) = z - P_C(preimage(z)): V = I + (1/r) J_P M.
    ProjectionJacobian jac =
        ctx.instance.constraints.projection_jacobian(scenario, pm.preimage);
    Matrix v = Matrix::Identity(n, n) + jac.apply_left(m) / ctx.r;

    Vector d = Eigen::PartialPivLU<Matrix>(v).solve(-g);
    bool solved = d.allFinite() && (v * d + g).norm() <= 1e-8 * std::max(1.0, gn);
    if (!solved) {
      // Regularize once, then give up on this direction.
      Matrix vr = v + opts.regularization * Matrix::Identity(n, n);
      d = Eigen::PartialPivLU<Matrix>(vr).solve(-g);
      solved = d.allFinite() && (vr * d + g).norm() <= 1e-8 * std::max(1.0, gn);
    }

    bool stepped = false;
    if (solved) {
      double step = 1.0;
      while (step >= opts.min_step) {
        Vector zc = out.z + step * d;
        ProximalMapResult pmc = proximal_map(ctx, scenario, zc);
        Vector gc = zc - pmc.value;
        const double gcn = gc.norm();
        if (gcn <= (1.0 - opts.sufficient_decrease * step) * gn) {
          out.z = std::move(zc);
          pm = std::move(pmc);
          g = std::move(gc);
          gn = gcn;
          stepped = true;
          break;
        }
        step *= opts.backtrack_factor;
      }
    }
    if (!stepped) {
      // Singular element or stalled line search: fall back to one plain
      // fixed-point sweep and continue.
      out.z = pm.value;
      pm = proximal_map(ctx, scenario, out.z);
      g = out.z - pm.value;
      gn = g.norm();
      ++out.stats.fallback_sweeps;
    }
    ++out.stats.iterations;
    out.stats.residual = gn;
  }
  return out;
}

ScenarioSolveResult newton_solve(const SubproblemContext& ctx, int scenario,
                                 const SubsolverConfig& cfg) {
  cfg.validate();
  return newton_solve_from(ctx, scenario, ctx.x.values.col(scenario), cfg.inner_tol, cfg);
}

Certificate build_certificate(const SubproblemContext& ctx, const PolicyVector& z) {
  const ScenarioSpace& space = ctx.instance.space;
  require_conformant(z, space, "build_certificate");
  Certificate cert;
  cert.x_hat = PolicyVector{Matrix(space.total_dim(), space.scenario_count())};
  cert.w_hat = PolicyVector{Matrix(space.total_dim(), space.scenario_count())};
  cert.delta = PolicyVector{Matrix(space.total_dim(), space.scenario_count())};
  for (int s = 0; s < space.scenario_count(); ++s) {
    Vector w_hat = proximal_map(ctx, s, z.values.col(s)).value;
    Vector fz = ctx.instance.mapping.evaluate(s, z.values.col(s));
    Vector fw = ctx.instance.mapping.evaluate(s, w_hat);
    // The sign matters: with x_hat = w_hat + (F(z) - F(w_hat))/r the shifted
    // point r(x - x_hat) - w lands exactly in (F + N_C)(w_hat) by the
    // projection's normal-cone property.
    Vector x_hat = w_hat + (fz - fw) / ctx.r;
    cert.w_hat.values.col(s) = w_hat;
    cert.x_hat.values.col(s) = x_hat;
    cert.delta.values.col(s) = w_hat - x_hat;
  }
  return cert;
}

}  // namespace svi
