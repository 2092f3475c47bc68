#pragma once

#include "svi/bench.hpp"
#include "svi/common.hpp"
#include "svi/hedging.hpp"
#include "svi/instance.hpp"

#include <string>
#include <vector>

namespace svi {

// All files are JSON with an explicit "schema" tag:
//   svi-instance/1    space + mapping + constraints
//   svi-solution/1    x and w policies
//   svi-experiment/1  benchmark campaign configuration
// Matrices are stored row-major; infinite box bounds are encoded as null.

std::string instance_to_json(const SviInstance& inst);
SviInstance instance_from_json(const std::string& text);

std::string solution_to_json(const PolicyVector& x, const PolicyVector& w);
// Returns (x, w); shapes are validated against the space by the caller.
std::pair<PolicyVector, PolicyVector> solution_from_json(const std::string& text);

std::string experiment_to_json(const ExperimentConfig& config);
ExperimentConfig experiment_from_json(const std::string& text);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

// Shortest decimal that round-trips the value exactly.
std::string format_double(double v);

// Per-outer-iteration run log in CSV form.
std::string history_to_csv(const std::vector<IterationRecord>& history);

}  // namespace svi
