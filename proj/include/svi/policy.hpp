#pragma once

#include "svi/common.hpp"
#include "svi/scenario_space.hpp"

namespace svi {

// A decision or multiplier function on a finite scenario space: one vector of
// length total_dim per scenario, stored densely with one column per scenario.
struct PolicyVector {
  Matrix values;  // total_dim x scenario_count

  PolicyVector() = default;
  explicit PolicyVector(Matrix v) : values(std::move(v)) {}

  static PolicyVector zero(const ScenarioSpace& space) {
    return PolicyVector{Matrix::Zero(space.total_dim(), space.scenario_count())};
  }
  static PolicyVector constant(const ScenarioSpace& space, double value) {
    return PolicyVector{Matrix::Constant(space.total_dim(), space.scenario_count(), value)};
  }

  auto scenario(int s) { return values.col(s); }
  auto scenario(int s) const { return values.col(s); }
};

// Throws DimensionError when the policy's shape does not match the space.
void require_conformant(const PolicyVector& u, const ScenarioSpace& space,
                        const char* where);

// Expectational inner product: sum over scenarios of p(xi) times the
// pointwise Euclidean inner product.  Accumulation is sequential in
// ascending scenario order, which keeps the reduction deterministic for a
// fixed scenario ordering.
double inner_product(const PolicyVector& a, const PolicyVector& b,
                     const ScenarioSpace& space);

double norm(const PolicyVector& a, const ScenarioSpace& space);

// Orthogonal projection onto the nonanticipativity subspace: within every
// information class, each stage block is replaced by its probability-weighted
// class mean, replicated across the class.
PolicyVector project_nonanticipative(const PolicyVector& u, const ScenarioSpace& space);

// Projection onto the orthogonal complement (the multiplier subspace):
// identity minus project_nonanticipative.
PolicyVector project_multipliers(const PolicyVector& u, const ScenarioSpace& space);

// Norm of a primal/multiplier pair in the metric the algorithm contracts in:
// sqrt(|x|^2 + r^-2 |w|^2) with expectational norms.  Requires r > 0.
double pair_norm(const PolicyVector& x, const PolicyVector& w, double r,
                 const ScenarioSpace& space);

}  // namespace svi
