#include "svi/mapping.hpp"

#include <cmath>
#include <string>

namespace svi {

double spectral_norm(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  // Exact and deterministic at the dimensions in scope; the eigenvalues of
  // M^T M are the squared singular values.
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.transpose() * m);
  const double top = es.eigenvalues().maxCoeff();
  return top > 0.0 ? std::sqrt(top) : 0.0;
}

AffineMapping::AffineMapping(std::vector<Matrix> matrices, std::vector<Vector> offsets)
    : matrices_(std::move(matrices)), offsets_(std::move(offsets)) {
  if (matrices_.empty() || matrices_.size() != offsets_.size())
    throw DimensionError("affine mapping needs one matrix and one offset per scenario");
  dim_ = static_cast<int>(matrices_[0].rows());
  moduli_.resize(matrices_.size());
  for (std::size_t s = 0; s < matrices_.size(); ++s) {
    if (matrices_[s].rows() != dim_ || matrices_[s].cols() != dim_)
      throw DimensionError("matrix of scenario " + std::to_string(s) + " is " +
                           std::to_string(matrices_[s].rows()) + "x" +
                           std::to_string(matrices_[s].cols()) + ", expected " +
                           std::to_string(dim_) + "x" + std::to_string(dim_));
    if (offsets_[s].size() != dim_)
      throw DimensionError("offset of scenario " + std::to_string(s) + " has length " +
                           std::to_string(offsets_[s].size()) + ", expected " +
                           std::to_string(dim_));
    if (!matrices_[s].allFinite() || !offsets_[s].allFinite())
      throw ParameterError("scenario " + std::to_string(s) +
                           " carries non-finite mapping data");
    moduli_[s] = spectral_norm(matrices_[s]);
    max_modulus_ = std::max(max_modulus_, moduli_[s]);
  }
}

Vector AffineMapping::evaluate(int scenario, const Eigen::Ref<const Vector>& x) const {
  if (scenario < 0 || scenario >= scenario_count())
    throw DimensionError("mapping evaluated at unknown scenario " +
                         std::to_string(scenario));
  if (x.size() != dim_)
    throw DimensionError("mapping of scenario " + std::to_string(scenario) +
                         " evaluated on a vector of length " + std::to_string(x.size()) +
                         ", expected " + std::to_string(dim_));
  return matrices_[scenario] * x + offsets_[scenario];
}

}  // namespace svi
