#include "svi/policy.hpp"

#include <cmath>
#include <string>

namespace svi {

void require_conformant(const PolicyVector& u, const ScenarioSpace& space,
                        const char* where) {
  if (u.values.rows() != space.total_dim() || u.values.cols() != space.scenario_count())
    throw DimensionError(std::string(where) + ": policy of shape " +
                         std::to_string(u.values.rows()) + "x" +
                         std::to_string(u.values.cols()) + " does not match space (" +
                         std::to_string(space.total_dim()) + " coordinates, " +
                         std::to_string(space.scenario_count()) + " scenarios)");
}

double inner_product(const PolicyVector& a, const PolicyVector& b,
                     const ScenarioSpace& space) {
  require_conformant(a, space, "inner_product (left)");
  require_conformant(b, space, "inner_product (right)");
  const Vector& p = space.probabilities();
  double acc = 0.0;
  for (int s = 0; s < space.scenario_count(); ++s)
    acc += p[s] * a.values.col(s).dot(b.values.col(s));
  return acc;
}

double norm(const PolicyVector& a, const ScenarioSpace& space) {
  return std::sqrt(inner_product(a, a, space));
}

PolicyVector project_nonanticipative(const PolicyVector& u, const ScenarioSpace& space) {
  require_conformant(u, space, "project_nonanticipative");
  PolicyVector out{Matrix(u.values.rows(), u.values.cols())};
  const Vector& p = space.probabilities();
  for (int k = 0; k < space.stage_count(); ++k) {
    const Index off = space.stage_offset(k);
    const Index nk = space.stage_dims()[k];
    const StagePartition& part = space.info_partitions()[k];
    for (std::size_t c = 0; c < part.size(); ++c) {
      Vector mean = Vector::Zero(nk);
      for (int s : part[c]) mean.noalias() += p[s] * u.values.block(off, s, nk, 1);
      mean /= space.class_mass(k, static_cast<int>(c));
      for (int s : part[c]) out.values.block(off, s, nk, 1) = mean;
    }
  }
  return out;
}

PolicyVector project_multipliers(const PolicyVector& u, const ScenarioSpace& space) {
  PolicyVector n = project_nonanticipative(u, space);
  n.values = u.values - n.values;
  return n;
}

double pair_norm(const PolicyVector& x, const PolicyVector& w, double r,
                 const ScenarioSpace& space) {
  if (!(r > 0.0))
    throw ParameterError("pair_norm requires r > 0, got " + std::to_string(r));
  const double nx = norm(x, space);
  const double nw = norm(w, space);
  return std::sqrt(nx * nx + (nw / r) * (nw / r));
}

}  // namespace svi
