#pragma once

#include "svi/common.hpp"

#include <vector>

namespace svi {

// Per-scenario mapping interface: an evaluator plus a Lipschitz modulus
// estimate.  Only the affine implementation ships; the interface exists so
// the subsolvers are written against evaluations, not matrices.
class ScenarioMapping {
 public:
  virtual ~ScenarioMapping() = default;
  virtual int dim() const = 0;
  virtual int scenario_count() const = 0;
  virtual Vector evaluate(int scenario, const Eigen::Ref<const Vector>& x) const = 0;
  virtual double lipschitz_modulus(int scenario) const = 0;
};

// Largest singular value, computed as sqrt of the top eigenvalue of M^T M.
double spectral_norm(const Matrix& m);

// x -> M_s x + b_s per scenario.  Lipschitz moduli are the spectral norms,
// computed once at construction.
class AffineMapping final : public ScenarioMapping {
 public:
  AffineMapping(std::vector<Matrix> matrices, std::vector<Vector> offsets);

  int dim() const override { return dim_; }
  int scenario_count() const override { return static_cast<int>(matrices_.size()); }
  Vector evaluate(int scenario, const Eigen::Ref<const Vector>& x) const override;
  double lipschitz_modulus(int scenario) const override { return moduli_[scenario]; }

  const Matrix& matrix(int scenario) const { return matrices_[scenario]; }
  const Vector& offset(int scenario) const { return offsets_[scenario]; }
  double max_lipschitz_modulus() const { return max_modulus_; }

 private:
  std::vector<Matrix> matrices_;
  std::vector<Vector> offsets_;
  std::vector<double> moduli_;
  double max_modulus_ = 0.0;
  int dim_ = 0;
};

}  // namespace svi
