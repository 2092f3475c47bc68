#pragma once

#include "svi/common.hpp"
#include "svi/instance.hpp"

#include <array>
#include <cstdint>

namespace svi {

// Two players sell the same good in two stages.  Player i picks stage-1
// quantities x1_i (before the scenario is known) and stage-2 quantities
// x2_i(xi); prices are linear in total supply,
//   p1 = alpha1 (a1 - sum x1_1 - sum x1_2),
//   p2(xi) = alpha2(xi) (a2(xi) - sum x2_1 - sum x2_2),
// and player i minimizes cost minus revenue
//   g_i = c1_i . x1_i - p1 sum_j x1_ij + c2_i(xi) . x2_i - p2 sum_j x2_ij
// subject to x1_ij >= 0, x2_ij >= 0, x1_ij + x2_ij <= cap_ij(xi).
//
// Decision layout per scenario: (x1 player1, x1 player2 | x2 player1,
// x2 player2); stages have equal width m1 + m2.
struct NashGameParams {
  int m1 = 0, m2 = 0;
  double alpha1 = 0.0, a1 = 0.0;
  Vector c1_player1, c1_player2;  // stage-1 unit costs
  Vector probabilities;
  Vector alpha2, a2;              // one entry per scenario
  Matrix c2_player1, c2_player2;  // m_i x scenario_count
  Matrix cap_player1, cap_player2;  // m_i x scenario_count, strictly positive

  int scenario_count() const { return static_cast<int>(probabilities.size()); }
  int stage_dim() const { return m1 + m2; }
  int total_dim() const { return 2 * (m1 + m2); }
  void validate() const;
};

// Sampling intervals for the random family.  The defaults are tuned as a
// package.  Stage 2 is a seller's market in reverse: alpha2(xi) a2(xi) stays
// below every c2 entry, so second-stage production is idle and its only role
// is the large per-scenario curvature that drives max |M_xi| = 3 m alpha2
// to order 1e3 at m1 = m2 = 10.  Stage 1 is a capacitated oligopoly with a
// wide cost spread: cheap products pin at their caps, expensive ones stay
// idle, and about one product per player lands strictly between, which
// leaves a well-conditioned slow mode of size alpha1 instead of the
// degenerate cost near-ties that blow up iteration counts when many
// products compete at the margin.
struct NashRanges {
  std::array<double, 2> alpha1{0.2, 0.3};
  std::array<double, 2> a1{8.0, 12.0};
  std::array<double, 2> c1{0.5, 3.0};
  std::array<double, 2> alpha2{25.0, 35.0};
  std::array<double, 2> a2{0.02, 0.05};
  std::array<double, 2> c2{2.5, 3.5};
  std::array<double, 2> cap{0.4, 0.6};
  double min_probability = 1e-6;
  void validate() const;
};

// Seeded draw from the random family.  Probabilities are flat-Dirichlet and
// resampled until all exceed ranges.min_probability; assembled matrices are
// symmetric positive semidefinite by construction, but monotonicity is
// re-checked anyway and failing draws are rejected (count reported through
// redraws when given).
NashGameParams sample_params(std::uint64_t seed, int scenario_count, int m1, int m2,
                             const NashRanges& ranges = {}, int* redraws = nullptr);

// Extensive-form instance: two-stage scenario space, per-scenario affine
// gradient map (block diagonal across stages) and capped-pair constraints
// linking x1_ij with x2_ij.
SviInstance assemble_instance(const NashGameParams& params);

// Two-scenario, two-dimensional affine fixture on the nonnegative orthant
// with single-stage nonanticipativity (decisions constant across scenarios):
// M_0 = [[2,1],[1,2]], b_0 = (1,1); M_1 = [[2,1],[2,1]], b_1 = (1,2),
// equiprobable.  (0, 0) solves it; the solution set is not a singleton.
SviInstance two_scenario_example();

}  // namespace svi
