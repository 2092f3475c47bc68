#pragma once

#include "svi/common.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace svi {

enum class ConstraintKind { Orthant, Box, CappedPair, Custom };

// One Clarke generalized-Jacobian element of a piecewise-affine projection,
// stored structurally: either a 0/1 diagonal (orthant, box) or a list of
// 2x2 blocks covering every coordinate exactly once (capped pairs).
struct ProjectionJacobian {
  struct PairBlock {
    int first, second;       // global coordinate indices of the pair
    Eigen::Matrix2d block;
  };
  Vector diag;               // empty when pair blocks are used
  std::vector<PairBlock> pairs;

  // J_P * m without forming J_P densely.
  Matrix apply_left(const Matrix& m) const;
  Vector apply(const Eigen::Ref<const Vector>& v) const;
};

// A per-scenario closed convex set with an exact projection.  Supported
// shapes: the nonnegative orthant, per-scenario boxes (entries may be
// infinite), products of "capped pairs" (a_j >= 0, b_j >= 0, a_j + b_j <=
// cap_j(xi), linking one coordinate of an early stage with one of a later
// stage), and caller-supplied custom projections.
class ConstraintFamily {
 public:
  static ConstraintFamily orthant(int dim, int scenario_count);
  // lower/upper: one pair of bound vectors per scenario; entries may be
  // -inf/+inf, but lower <= upper is required wherever both are finite.
  static ConstraintFamily box(std::vector<Vector> lower, std::vector<Vector> upper);
  // pairs must cover every coordinate of the space exactly once; caps holds
  // one positive cap per pair per scenario.
  static ConstraintFamily capped_pairs(int dim, std::vector<std::pair<int, int>> pairs,
                                       std::vector<Vector> caps);
  static ConstraintFamily custom(int dim, int scenario_count,
                                 std::function<Vector(int, const Vector&)> projection);

  ConstraintKind kind() const { return kind_; }
  int dim() const { return dim_; }
  int scenario_count() const { return scenario_count_; }

  // Exact Euclidean projection onto C(scenario).  For custom projections the
  // result is re-projected and an IntegrityError is thrown when the image
  // moves by more than 1e-10 relative (the callback left the set).
  Vector project(int scenario, const Eigen::Ref<const Vector>& q) const;

  bool contains(int scenario, const Eigen::Ref<const Vector>& x, double tol) const;

  // Whether a generalized projection Jacobian is available (piecewise-affine
  // projection); custom projections are excluded.
  bool piecewise_affine() const { return kind_ != ConstraintKind::Custom; }

  // One Clarke element of the projection at the pre-projection point.
  // Boundary coordinates are deterministically treated as constrained: a
  // coordinate sitting exactly on a bound gets indicator 0, a pair sitting
  // exactly on its cap gets the cap-edge block.
  ProjectionJacobian projection_jacobian(int scenario,
                                         const Eigen::Ref<const Vector>& preimage) const;

  // Accessors used by serialization.
  const std::vector<Vector>& box_lower() const { return lower_; }
  const std::vector<Vector>& box_upper() const { return upper_; }
  const std::vector<std::pair<int, int>>& pair_indices() const { return pairs_; }
  const std::vector<Vector>& pair_caps() const { return caps_; }

  // Exact projection onto {(a,b): a >= 0, b >= 0, a + b <= cap}: clamp to the
  // orthant; if that violates the cap, project onto the line a + b = cap and
  // clamp to the segment's endpoints.
  static Eigen::Vector2d project_capped_pair(double a, double b, double cap);

 private:
  ConstraintFamily() = default;

  ConstraintKind kind_ = ConstraintKind::Orthant;
  int dim_ = 0;
  int scenario_count_ = 0;
  std::vector<Vector> lower_, upper_;
  std::vector<std::pair<int, int>> pairs_;
  std::vector<Vector> caps_;
  std::function<Vector(int, const Vector&)> custom_;

  void check_scenario(int scenario) const;
};

}  // namespace svi
