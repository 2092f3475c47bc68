#include "svi/constraints.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace svi {

Matrix ProjectionJacobian::apply_left(const Matrix& m) const {
  Matrix out;
  if (diag.size() > 0) {
    out = diag.asDiagonal() * m;
  } else {
    out = Matrix::Zero(m.rows(), m.cols());
    for (const PairBlock& pb : pairs) {
      out.row(pb.first) = pb.block(0, 0) * m.row(pb.first) + pb.block(0, 1) * m.row(pb.second);
      out.row(pb.second) = pb.block(1, 0) * m.row(pb.first) + pb.block(1, 1) * m.row(pb.second);
    }
  }
  return out;
}

Vector ProjectionJacobian::apply(const Eigen::Ref<const Vector>& v) const {
  if (diag.size() > 0) return diag.cwiseProduct(v);
  Vector out = Vector::Zero(v.size());
  for (const PairBlock& pb : pairs) {
    out[pb.first] = pb.block(0, 0) * v[pb.first] + pb.block(0, 1) * v[pb.second];
    out[pb.second] = pb.block(1, 0) * v[pb.first] + pb.block(1, 1) * v[pb.second];
  }
  return out;
}

Eigen::Vector2d ConstraintFamily::project_capped_pair(double a, double b, double cap) {
  const double ca = std::max(a, 0.0);
  const double cb = std::max(b, 0.0);
  if (ca + cb <= cap) return {ca, cb};
  const double shift = 0.5 * (cap - a - b);
  const double pa = a + shift;
  const double pb = b + shift;
  if (pa < 0.0) return {0.0, cap};
  if (pb < 0.0) return {cap, 0.0};
  return {pa, pb};
}

ConstraintFamily ConstraintFamily::orthant(int dim, int scenario_count) {
  if (dim < 1 || scenario_count < 1)
    throw DimensionError("orthant constraints need positive dimension and scenario count");
  ConstraintFamily f;
  f.kind_ = ConstraintKind::Orthant;
  f.dim_ = dim;
  f.scenario_count_ = scenario_count;
  return f;
}

ConstraintFamily ConstraintFamily::box(std::vector<Vector> lower, std::vector<Vector> upper) {
  if (lower.empty() || lower.size() != upper.size())
    throw DimensionError("box constraints need one lower and one upper bound per scenario");
  ConstraintFamily f;
  f.kind_ = ConstraintKind::Box;
  f.scenario_count_ = static_cast<int>(lower.size());
  f.dim_ = static_cast<int>(lower[0].size());
  for (std::size_t s = 0; s < lower.size(); ++s) {
    if (lower[s].size() != f.dim_ || upper[s].size() != f.dim_)
      throw DimensionError("box bounds of scenario " + std::to_string(s) +
                           " do not match dimension " + std::to_string(f.dim_));
    for (int i = 0; i < f.dim_; ++i) {
      if (std::isnan(lower[s][i]) || std::isnan(upper[s][i]) || lower[s][i] > upper[s][i])
        throw ParameterError("box bounds of scenario " + std::to_string(s) +
                             ", coordinate " + std::to_string(i) + " are inconsistent");
    }
  }
  f.lower_ = std::move(lower);
  f.upper_ = std::move(upper);
  return f;
}

ConstraintFamily ConstraintFamily::capped_pairs(int dim,
                                                std::vector<std::pair<int, int>> pairs,
                                                std::vector<Vector> caps) {
  if (dim < 2 || dim % 2 != 0)
    throw DimensionError("capped pairs need an even, positive dimension");
  if (pairs.size() != static_cast<std::size_t>(dim / 2))
    throw DimensionError("capped pairs must cover every coordinate exactly once: expected " +
                         std::to_string(dim / 2) + " pairs, got " +
                         std::to_string(pairs.size()));
  std::vector<int> seen(dim, 0);
  for (const auto& [i, j] : pairs) {
    if (i < 0 || i >= dim || j < 0 || j >= dim || i == j)
      throw DimensionError("capped pair (" + std::to_string(i) + ", " + std::to_string(j) +
                           ") is out of range");
    if (seen[i]++ || seen[j]++)
      throw DimensionError("coordinate " + std::to_string(seen[i] > 1 ? i : j) +
                           " appears in two capped pairs");
  }
  if (caps.empty()) throw DimensionError("capped pairs need per-scenario caps");
  for (std::size_t s = 0; s < caps.size(); ++s) {
    if (caps[s].size() != static_cast<Index>(pairs.size()))
      throw DimensionError("cap vector of scenario " + std::to_string(s) +
                           " has length " + std::to_string(caps[s].size()) + ", expected " +
                           std::to_string(pairs.size()));
    for (Index j = 0; j < caps[s].size(); ++j)
      if (!(caps[s][j] > 0.0) || !std::isfinite(caps[s][j]))
        throw ParameterError("cap of pair " + std::to_string(j) + ", scenario " +
                             std::to_string(s) + " must be positive and finite");
  }
  ConstraintFamily f;
  f.kind_ = ConstraintKind::CappedPair;
  f.dim_ = dim;
  f.scenario_count_ = static_cast<int>(caps.size());
  f.pairs_ = std::move(pairs);
  f.caps_ = std::move(caps);
  return f;
}

ConstraintFamily ConstraintFamily::custom(int dim, int scenario_count,
                                          std::function<Vector(int, const Vector&)> projection) {
  if (dim < 1 || scenario_count < 1)
    throw DimensionError("custom constraints need positive dimension and scenario count");
  if (!projection) throw ParameterError("custom constraints need a projection callback");
  ConstraintFamily f;
  f.kind_ = ConstraintKind::Custom;
  f.dim_ = dim;
  f.scenario_count_ = scenario_count;
  f.custom_ = std::move(projection);
  return f;
}

void ConstraintFamily::check_scenario(int scenario) const {
  if (scenario < 0 || scenario >= scenario_count_)
    throw DimensionError("constraint family queried at unknown scenario " +
                         std::to_string(scenario));
}

Vector ConstraintFamily::project(int scenario, const Eigen::Ref<const Vector>& q) const {
  check_scenario(scenario);
  if (q.size() != dim_)
    throw DimensionError("projection at scenario " + std::to_string(scenario) +
                         " got a vector of length " + std::to_string(q.size()) +
                         ", expected " + std::to_string(dim_));
  switch (kind_) {
    case ConstraintKind::Orthant:
      return q.cwiseMax(0.0);
    case ConstraintKind::Box:
      return q.cwiseMax(lower_[scenario]).cwiseMin(upper_[scenario]);
    case ConstraintKind::CappedPair: {
      Vector out(dim_);
      for (std::size_t j = 0; j < pairs_.size(); ++j) {
        const auto [ia, ib] = pairs_[j];
        const Eigen::Vector2d p = project_capped_pair(q[ia], q[ib], caps_[scenario][j]);
        out[ia] = p[0];
        out[ib] = p[1];
      }
      return out;
    }
    case ConstraintKind::Custom: {
      Vector p = custom_(scenario, q);
      if (p.size() != dim_)
        throw IntegrityError("custom projection changed the dimension at scenario " +
                             std::to_string(scenario));
      // A projection image must be a fixed point of the projection.
      Vector p2 = custom_(scenario, p);
      if ((p2 - p).norm() > 1e-10 * (1.0 + p.norm()))
        throw IntegrityError("custom projection left the constraint set at scenario " +
                             std::to_string(scenario));
      return p;
    }
  }
  throw IntegrityError("unreachable constraint kind");
}

bool ConstraintFamily::contains(int scenario, const Eigen::Ref<const Vector>& x,
                                double tol) const {
  check_scenario(scenario);
  switch (kind_) {
    case ConstraintKind::Orthant:
      return (x.array() >= -tol).all();
    case ConstraintKind::Box:
      return ((x - lower_[scenario]).array() >= -tol).all() &&
             ((upper_[scenario] - x).array() >= -tol).all();
    case ConstraintKind::CappedPair: {
      for (std::size_t j = 0; j < pairs_.size(); ++j) {
        const auto [ia, ib] = pairs_[j];
        if (x[ia] < -tol || x[ib] < -tol || x[ia] + x[ib] > caps_[scenario][j] + tol)
          return false;
      }
      return true;
    }
    case ConstraintKind::Custom:
      return (custom_(scenario, x) - x).norm() <= tol * (1.0 + x.norm());
  }
  return false;
}

ProjectionJacobian ConstraintFamily::projection_jacobian(
    int scenario, const Eigen::Ref<const Vector>& y) const {
  check_scenario(scenario);
  ProjectionJacobian jac;
  switch (kind_) {
    case ConstraintKind::Orthant: {
      jac.diag = (y.array() > 0.0).cast<double>();
      return jac;
    }
    case ConstraintKind::Box: {
      jac.diag =
          ((y.array() > lower_[scenario].array()) && (y.array() < upper_[scenario].array()))
              .cast<double>();
      return jac;
    }
    case ConstraintKind::CappedPair: {
      jac.pairs.reserve(pairs_.size());
      for (std::size_t j = 0; j < pairs_.size(); ++j) {
        const auto [ia, ib] = pairs_[j];
        const double a = y[ia], b = y[ib], cap = caps_[scenario][j];
        ProjectionJacobian::PairBlock pb{ia, ib, Eigen::Matrix2d::Zero()};
        // Region split mirrors project_capped_pair: clipping alone decides
        // only while the clipped point respects the cap.
        if (std::max(a, 0.0) + std::max(b, 0.0) <= cap) {
          pb.block(0, 0) = a > 0.0 ? 1.0 : 0.0;
          pb.block(1, 1) = b > 0.0 ? 1.0 : 0.0;
        } else {
          // Either the cap edge (projector onto the direction (1,-1)) or a
          // vertex of the cap, where the projection is locally constant.
          const double shift = 0.5 * (cap - a - b);
          if (a + shift > 0.0 && b + shift > 0.0) pb.block << 0.5, -0.5, -0.5, 0.5;
        }
        jac.pairs.push_back(pb);
      }
      return jac;
    }
    case ConstraintKind::Custom:
      throw ConfigError("custom projections expose no generalized Jacobian");
  }
  throw IntegrityError("unreachable constraint kind");
}

}  // namespace svi
