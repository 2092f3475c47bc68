#include "svi/nash_game.hpp"

#include "svi/rng.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace svi {

namespace {

void require_range(const std::array<double, 2>& r, const char* name,
                   bool positive_lo = false) {
  if (!std::isfinite(r[0]) || !std::isfinite(r[1]) || r[0] > r[1])
    throw ParameterError(std::string(name) + " range must be finite with lo <= hi");
  if (positive_lo && !(r[0] > 0.0))
    throw ParameterError(std::string(name) + " range must be strictly positive");
}

void require_cost_matrix(const Matrix& m, int rows, int cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols)
    throw DimensionError(std::string(name) + " must be " + std::to_string(rows) + " x " +
                         std::to_string(cols) + ", got " + std::to_string(m.rows()) +
                         " x " + std::to_string(m.cols()));
  if (!m.allFinite())
    throw ParameterError(std::string(name) + " has non-finite entries");
}

// alpha (J + blkdiag(J_m1, J_m2)): the one-stage gradient block of the
// quantity game.  J is all ones; the blkdiag term is each player's own-supply
// sensitivity.  Symmetric PSD for alpha > 0, so every draw is monotone.
Matrix stage_block(double alpha, int m1, int m2) {
  const int d = m1 + m2;
  Matrix m = Matrix::Ones(d, d);
  m.topLeftCorner(m1, m1).array() += 1.0;
  m.bottomRightCorner(m2, m2).array() += 1.0;
  return alpha * m;
}

}  // namespace

void NashRanges::validate() const {
  require_range(alpha1, "alpha1", /*positive_lo=*/true);
  require_range(a1, "a1");
  require_range(c1, "c1");
  require_range(alpha2, "alpha2", /*positive_lo=*/true);
  require_range(a2, "a2");
  require_range(c2, "c2");
  require_range(cap, "cap", /*positive_lo=*/true);
  if (!(min_probability >= 0.0) || !(min_probability < 1.0))
    throw ParameterError("min_probability must lie in [0, 1)");
}

void NashGameParams::validate() const {
  if (m1 < 1 || m2 < 1)
    throw ParameterError("both players need at least one product, got m1 = " +
                         std::to_string(m1) + ", m2 = " + std::to_string(m2));
  if (!(alpha1 > 0.0) || !std::isfinite(alpha1))
    throw ParameterError("alpha1 must be positive and finite");
  if (!std::isfinite(a1)) throw ParameterError("a1 must be finite");
  const int s = scenario_count();
  if (s < 1) throw ParameterError("at least one scenario is required");
  if (c1_player1.size() != m1 || c1_player2.size() != m2)
    throw DimensionError("stage-1 cost vectors must have lengths m1 and m2");
  if (!c1_player1.allFinite() || !c1_player2.allFinite())
    throw ParameterError("stage-1 costs have non-finite entries");
  if (alpha2.size() != s || a2.size() != s)
    throw DimensionError("alpha2 and a2 need one entry per scenario");
  if (!alpha2.allFinite() || !a2.allFinite() || (alpha2.array() <= 0.0).any())
    throw ParameterError("alpha2 must be positive and finite, a2 finite");
  require_cost_matrix(c2_player1, m1, s, "c2_player1");
  require_cost_matrix(c2_player2, m2, s, "c2_player2");
  require_cost_matrix(cap_player1, m1, s, "cap_player1");
  require_cost_matrix(cap_player2, m2, s, "cap_player2");
  if ((cap_player1.array() <= 0.0).any() || (cap_player2.array() <= 0.0).any())
    throw ParameterError("capacities must be strictly positive");
}

NashGameParams sample_params(std::uint64_t seed, int scenario_count, int m1, int m2,
                             const NashRanges& ranges, int* redraws) {
  ranges.validate();
  if (scenario_count < 1) throw ParameterError("scenario_count must be at least 1");
  if (m1 < 1 || m2 < 1) throw ParameterError("m1 and m2 must be at least 1");

  Rng rng(seed);
  if (redraws) *redraws = 0;
  for (int attempt = 0; attempt < 100; ++attempt) {
    NashGameParams p;
    p.m1 = m1;
    p.m2 = m2;

    p.probabilities = rng.dirichlet(scenario_count);
    for (int guard = 0; p.probabilities.minCoeff() < ranges.min_probability; ++guard) {
      if (guard >= 10000)
        throw ParameterError("min_probability " + std::to_string(ranges.min_probability) +
                             " is unreachable for " + std::to_string(scenario_count) +
                             " scenarios");
      p.probabilities = rng.dirichlet(scenario_count);
    }

    // Explicit loops pin the draw order (and hence the sampled family).
    auto draw = [&rng](const std::array<double, 2>& r) { return rng.uniform(r[0], r[1]); };
    auto fill_vector = [&draw](Vector& v, int n, const std::array<double, 2>& r) {
      v.resize(n);
      for (int i = 0; i < n; ++i) v[i] = draw(r);
    };
    auto fill = [&draw](Matrix& m, int rows, int cols, const std::array<double, 2>& r) {
      m.resize(rows, cols);
      for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = draw(r);
    };

    p.alpha1 = draw(ranges.alpha1);
    p.a1 = draw(ranges.a1);
    fill_vector(p.c1_player1, m1, ranges.c1);
    fill_vector(p.c1_player2, m2, ranges.c1);
    fill_vector(p.alpha2, scenario_count, ranges.alpha2);
    fill_vector(p.a2, scenario_count, ranges.a2);
    fill(p.c2_player1, m1, scenario_count, ranges.c2);
    fill(p.c2_player2, m2, scenario_count, ranges.c2);

    // Capacities are physical plant limits fixed before the scenario is
    // revealed, so each product draws one cap shared by every scenario.
    // Scenario-varying caps also stall the solver: the binding cap of a
    // first-stage coordinate becomes the minimum across scenarios, and two
    // scenarios drawing nearly equal minima create a near-degenerate
    // multiplier split that crawls at a rate set by the tie gap.
    Vector cap1, cap2;
    fill_vector(cap1, m1, ranges.cap);
    fill_vector(cap2, m2, ranges.cap);
    p.cap_player1 = cap1.replicate(1, scenario_count);
    p.cap_player2 = cap2.replicate(1, scenario_count);

    if (check_monotone(assemble_instance(p)).monotone) return p;
    if (redraws) ++*redraws;
  }
  throw IntegrityError("no monotone draw in 100 attempts; the assembled blocks should "
                       "be positive semidefinite by construction");
}

SviInstance assemble_instance(const NashGameParams& params) {
  params.validate();
  const int s = params.scenario_count();
  const int d = params.stage_dim();

  ScenarioSpace space = ScenarioSpace::two_stage(params.probabilities, d, d);

  const Matrix m_stage1 = stage_block(params.alpha1, params.m1, params.m2);
  Vector b_stage1(d);
  b_stage1 << params.c1_player1, params.c1_player2;
  b_stage1.array() -= params.alpha1 * params.a1;

  std::vector<Matrix> matrices(s, Matrix::Zero(2 * d, 2 * d));
  std::vector<Vector> offsets(s, Vector::Zero(2 * d));
  for (int k = 0; k < s; ++k) {
    matrices[k].topLeftCorner(d, d) = m_stage1;
    matrices[k].bottomRightCorner(d, d) =
        stage_block(params.alpha2[k], params.m1, params.m2);
    offsets[k].head(d) = b_stage1;
    offsets[k].segment(d, params.m1) = params.c2_player1.col(k);
    offsets[k].tail(params.m2) = params.c2_player2.col(k);
    offsets[k].tail(d).array() -= params.alpha2[k] * params.a2[k];
  }

  // Coordinate t of stage 1 shares a capacity with coordinate t of stage 2.
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(d);
  for (int t = 0; t < d; ++t) pairs.emplace_back(t, d + t);
  std::vector<Vector> caps(s, Vector(d));
  for (int k = 0; k < s; ++k) {
    caps[k].head(params.m1) = params.cap_player1.col(k);
    caps[k].tail(params.m2) = params.cap_player2.col(k);
  }

  return SviInstance(std::move(space), AffineMapping(std::move(matrices), std::move(offsets)),
                     ConstraintFamily::capped_pairs(2 * d, std::move(pairs), std::move(caps)));
}

SviInstance two_scenario_example() {
  Vector probabilities(2);
  probabilities << 0.5, 0.5;
  ScenarioSpace space = ScenarioSpace::single_stage(std::move(probabilities), 2);

  std::vector<Matrix> matrices(2, Matrix(2, 2));
  matrices[0] << 2.0, 1.0, 1.0, 2.0;
  matrices[1] << 2.0, 1.0, 2.0, 1.0;
  std::vector<Vector> offsets(2, Vector(2));
  offsets[0] << 1.0, 1.0;
  offsets[1] << 1.0, 2.0;

  return SviInstance(std::move(space), AffineMapping(std::move(matrices), std::move(offsets)),
                     ConstraintFamily::orthant(2, 2));
}

}  // namespace svi
