#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace svi {

using Scalar = double;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Eigen::Index;

// Base class for everything thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shapes inconsistent with the scenario space or with each other.
struct DimensionError : Error { using Error::Error; };
// A numeric parameter outside its admissible range.
struct ParameterError : Error { using Error::Error; };
// A solver or experiment configuration rejected before any work is done.
struct ConfigError : Error { using Error::Error; };
// An internal consistency check failed; indicates a bug, not bad input.
struct IntegrityError : Error { using Error::Error; };
// An iteration budget was exhausted before the requested tolerance.
struct BudgetError : Error { using Error::Error; };
// File or format problem.
struct IoError : Error { using Error::Error; };

}  // namespace svi
