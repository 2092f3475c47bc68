#include "svi/scenario_space.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace svi {

namespace {

std::string describe_class(int stage, std::size_t class_index) {
  return "stage " + std::to_string(stage + 1) + ", class " + std::to_string(class_index);
}

}  // namespace

ScenarioSpace::ScenarioSpace(Vector probabilities, std::vector<int> stage_dims,
                             std::vector<StagePartition> info_partitions)
    : probabilities_(std::move(probabilities)),
      stage_dims_(std::move(stage_dims)),
      partitions_(std::move(info_partitions)) {
  validate();
  finalize();
}

ScenarioSpace ScenarioSpace::two_stage(Vector probabilities, int first_stage_dim,
                                       int second_stage_dim) {
  const int s = static_cast<int>(probabilities.size());
  InfoClass all(s);
  std::iota(all.begin(), all.end(), 0);
  StagePartition leaves;
  leaves.reserve(s);
  for (int i = 0; i < s; ++i) leaves.push_back({i});
  return ScenarioSpace(std::move(probabilities), {first_stage_dim, second_stage_dim},
                       {StagePartition{all}, std::move(leaves)});
}

ScenarioSpace ScenarioSpace::single_stage(Vector probabilities, int dim) {
  const int s = static_cast<int>(probabilities.size());
  InfoClass all(s);
  std::iota(all.begin(), all.end(), 0);
  return ScenarioSpace(std::move(probabilities), {dim}, {StagePartition{all}});
}

void ScenarioSpace::validate() const {
  const int s = static_cast<int>(probabilities_.size());
  if (s < 1) throw DimensionError("scenario space needs at least one scenario");

  for (int i = 0; i < s; ++i) {
    if (!(probabilities_[i] > 0.0) || !std::isfinite(probabilities_[i]))
      throw ParameterError("probability of scenario " + std::to_string(i) +
                           " must be strictly positive and finite, got " +
                           std::to_string(probabilities_[i]));
  }
  // Inputs must already be a distribution; nothing is renormalized here.
  const double total = probabilities_.sum();
  if (std::abs(total - 1.0) > 1e-12)
    throw ParameterError("scenario probabilities must sum to 1 within 1e-12, got " +
                         std::to_string(total));

  if (stage_dims_.empty()) throw DimensionError("scenario space needs at least one stage");
  for (std::size_t k = 0; k < stage_dims_.size(); ++k) {
    if (stage_dims_[k] < 1)
      throw DimensionError("stage " + std::to_string(k + 1) +
                           " must have positive dimension");
  }
  if (partitions_.size() != stage_dims_.size())
    throw DimensionError("expected one information partition per stage (" +
                         std::to_string(stage_dims_.size()) + "), got " +
                         std::to_string(partitions_.size()));

  // Every partition covers {0..s-1} exactly once.
  for (std::size_t k = 0; k < partitions_.size(); ++k) {
    std::vector<int> seen(s, 0);
    if (partitions_[k].empty())
      throw DimensionError("information partition at stage " + std::to_string(k + 1) +
                           " is empty");
    for (std::size_t c = 0; c < partitions_[k].size(); ++c) {
      if (partitions_[k][c].empty())
        throw DimensionError("empty information class at " + describe_class(k, c));
      for (int idx : partitions_[k][c]) {
        if (idx < 0 || idx >= s)
          throw DimensionError("scenario index " + std::to_string(idx) +
                               " out of range at " + describe_class(k, c));
        if (seen[idx]++)
          throw DimensionError("scenario " + std::to_string(idx) +
                               " appears twice in the partition at stage " +
                               std::to_string(k + 1));
      }
    }
    for (int i = 0; i < s; ++i)
      if (!seen[i])
        throw DimensionError("scenario " + std::to_string(i) +
                             " missing from the partition at stage " +
                             std::to_string(k + 1));
  }

  // No information before stage 1.
  if (partitions_[0].size() != 1)
    throw DimensionError("the stage-1 partition must be the single class of all scenarios");

  // Information may only be gained: each class refines one earlier class.
  for (std::size_t k = 1; k < partitions_.size(); ++k) {
    std::vector<int> parent(s, -1);
    for (std::size_t c = 0; c < partitions_[k - 1].size(); ++c)
      for (int idx : partitions_[k - 1][c]) parent[idx] = static_cast<int>(c);
    for (std::size_t c = 0; c < partitions_[k].size(); ++c) {
      const InfoClass& cls = partitions_[k][c];
      for (int idx : cls) {
        if (parent[idx] != parent[cls.front()])
          throw DimensionError("partition at stage " + std::to_string(k + 1) +
                               " does not refine stage " + std::to_string(k) + ": " +
                               describe_class(k, c) + " straddles two earlier classes");
      }
    }
  }
}

void ScenarioSpace::finalize() {
  stage_offsets_.resize(stage_dims_.size());
  total_dim_ = 0;
  for (std::size_t k = 0; k < stage_dims_.size(); ++k) {
    stage_offsets_[k] = total_dim_;
    total_dim_ += stage_dims_[k];
  }
  class_mass_.resize(partitions_.size());
  for (std::size_t k = 0; k < partitions_.size(); ++k) {
    class_mass_[k].resize(partitions_[k].size());
    for (std::size_t c = 0; c < partitions_[k].size(); ++c) {
      double mass = 0.0;
      for (int idx : partitions_[k][c]) mass += probabilities_[idx];
      class_mass_[k][c] = mass;
    }
  }
}

}  // namespace svi
