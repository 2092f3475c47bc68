#include "svi/instance.hpp"

#include <algorithm>
#include <string>

namespace svi {

SviInstance::SviInstance(ScenarioSpace space_in, AffineMapping mapping_in,
                         ConstraintFamily constraints_in)
    : space(std::move(space_in)),
      mapping(std::move(mapping_in)),
      constraints(std::move(constraints_in)) {
  if (mapping.dim() != space.total_dim())
    throw DimensionError("mapping dimension " + std::to_string(mapping.dim()) +
                         " does not match the space's " +
                         std::to_string(space.total_dim()) + " coordinates");
  if (mapping.scenario_count() != space.scenario_count())
    throw DimensionError("mapping covers " + std::to_string(mapping.scenario_count()) +
                         " scenarios, the space has " +
                         std::to_string(space.scenario_count()));
  if (constraints.dim() != space.total_dim() ||
      constraints.scenario_count() != space.scenario_count())
    throw DimensionError("constraint family does not match the space's shape");
}

PolicyVector evaluate_mapping(const SviInstance& inst, const PolicyVector& x) {
  require_conformant(x, inst.space, "evaluate_mapping");
  PolicyVector out{Matrix(x.values.rows(), x.values.cols())};
  for (int s = 0; s < inst.space.scenario_count(); ++s)
    out.values.col(s) = inst.mapping.evaluate(s, x.values.col(s));
  return out;
}

PolicyVector project_constraints(const SviInstance& inst, const PolicyVector& q) {
  require_conformant(q, inst.space, "project_constraints");
  PolicyVector out{Matrix(q.values.rows(), q.values.cols())};
  for (int s = 0; s < inst.space.scenario_count(); ++s)
    out.values.col(s) = inst.constraints.project(s, q.values.col(s));
  return out;
}

MonotonicityCertificate check_monotone(const SviInstance& inst) {
  MonotonicityCertificate cert;
  const int s = inst.space.scenario_count();
  cert.min_eigenvalues.resize(s);
  for (int i = 0; i < s; ++i) {
    const Matrix& m = inst.mapping.matrix(i);
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
    cert.min_eigenvalues[i] = es.eigenvalues().minCoeff();
  }
  cert.monotone = (cert.min_eigenvalues.array() >= -1e-10).all();
  return cert;
}

double ResidualReport::max() const {
  return std::max({nonanticipativity_error, multiplier_error, natural_residual});
}

ResidualReport extensive_residual(const SviInstance& inst, const PolicyVector& x,
                                  const PolicyVector& w) {
  require_conformant(x, inst.space, "extensive_residual (x)");
  require_conformant(w, inst.space, "extensive_residual (w)");
  ResidualReport rep;
  PolicyVector xn = project_nonanticipative(x, inst.space);
  xn.values = x.values - xn.values;
  rep.nonanticipativity_error = norm(xn, inst.space);
  rep.multiplier_error = norm(project_nonanticipative(w, inst.space), inst.space);

  PolicyVector gap{Matrix(x.values.rows(), x.values.cols())};
  for (int s = 0; s < inst.space.scenario_count(); ++s) {
    Vector arg = x.values.col(s) - inst.mapping.evaluate(s, x.values.col(s)) - w.values.col(s);
    gap.values.col(s) = x.values.col(s) - inst.constraints.project(s, arg);
  }
  rep.natural_residual = norm(gap, inst.space);
  return rep;
}

}  // namespace svi
