#pragma once

#include "svi/common.hpp"
#include "svi/constraints.hpp"
#include "svi/mapping.hpp"
#include "svi/policy.hpp"
#include "svi/scenario_space.hpp"

namespace svi {

// Extensive-form stochastic variational inequality: find x in the
// nonanticipativity subspace and w in the multiplier subspace with
// -F(x(xi), xi) - w(xi) in the normal cone of C(xi) at x(xi) per scenario.
struct SviInstance {
  ScenarioSpace space;
  AffineMapping mapping;
  ConstraintFamily constraints;

  SviInstance(ScenarioSpace space_in, AffineMapping mapping_in,
              ConstraintFamily constraints_in);
};

// Per-scenario evaluation of the mapping on a whole policy.
PolicyVector evaluate_mapping(const SviInstance& inst, const PolicyVector& x);

// Per-scenario projection of a whole policy onto the constraint sets.
PolicyVector project_constraints(const SviInstance& inst, const PolicyVector& q);

// Smallest eigenvalue of the symmetric part of each scenario matrix; the
// instance counts as monotone when none falls below -1e-10.
struct MonotonicityCertificate {
  Vector min_eigenvalues;  // one per scenario
  bool monotone = false;
};
MonotonicityCertificate check_monotone(const SviInstance& inst);

// How far a candidate pair sits from solving the extensive form, split into
// its three components (all expectational norms):
//   nonanticipativity_error = |x - P_N x|
//   multiplier_error        = |P_N w|
//   natural_residual        = |x - P_C(x - F(x) - w)|
struct ResidualReport {
  double nonanticipativity_error = 0.0;
  double multiplier_error = 0.0;
  double natural_residual = 0.0;
  double max() const;
};
ResidualReport extensive_residual(const SviInstance& inst, const PolicyVector& x,
                                  const PolicyVector& w);

}  // namespace svi
