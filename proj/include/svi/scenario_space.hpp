#pragma once

#include "svi/common.hpp"

#include <vector>

namespace svi {

// Scenario indices that share the same history prefix at some stage.
// Decisions for that stage must coincide on all members of a class.
using InfoClass = std::vector<int>;
using StagePartition = std::vector<InfoClass>;

// A finite scenario space: probabilities, per-stage decision dimensions and
// the information partitions that encode which scenarios are still
// indistinguishable when each stage's decision is taken.
//
// Validation is strict: probabilities must be positive and sum to one within
// 1e-12 (inputs are rejected, never renormalized), every stage partition must
// cover {0..s-1} exactly once, the stage-1 partition must be the single class
// of all scenarios, and partitions must refine monotonically from stage to
// stage (information never decreases).
class ScenarioSpace {
 public:
  ScenarioSpace(Vector probabilities, std::vector<int> stage_dims,
                std::vector<StagePartition> info_partitions);

  // Stage-1 decisions shared by all scenarios, stage-2 fully adapted.
  static ScenarioSpace two_stage(Vector probabilities, int first_stage_dim,
                                 int second_stage_dim);
  // A single stage whose decisions are constant across scenarios.
  static ScenarioSpace single_stage(Vector probabilities, int dim);

  int scenario_count() const { return static_cast<int>(probabilities_.size()); }
  const Vector& probabilities() const { return probabilities_; }
  int stage_count() const { return static_cast<int>(stage_dims_.size()); }
  const std::vector<int>& stage_dims() const { return stage_dims_; }
  const std::vector<StagePartition>& info_partitions() const { return partitions_; }

  // Sum of the stage dimensions: the length of one scenario's decision vector.
  int total_dim() const { return total_dim_; }
  int stage_offset(int stage) const { return stage_offsets_[stage]; }

  // Total probability of one information class; positive by construction.
  double class_mass(int stage, int class_index) const {
    return class_mass_[stage][class_index];
  }

 private:
  Vector probabilities_;
  std::vector<int> stage_dims_;
  std::vector<StagePartition> partitions_;
  std::vector<int> stage_offsets_;
  std::vector<std::vector<double>> class_mass_;
  int total_dim_ = 0;

  void validate() const;
  void finalize();
};

}  // namespace svi
