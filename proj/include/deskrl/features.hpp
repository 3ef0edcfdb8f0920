#pragma once

#include <vector>

#include "deskrl/env.hpp"

namespace deskrl {

/// Strictly increasing active indices of a binary feature vector.
using SparseFeatures = std::vector<int>;

/// Per-game feature maps for the linear learners. chain_walk, key_door and
/// cliff_corridor use a one-hot over (discrete state x action); crossing
/// uses two tiles, a (row x action) one-hot plus a hazard-phase one-hot, so
/// that value generalizes across rows sharing a phase.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(const GameSpec& spec);

  /// One-hot map over (payload radices x action) for a custom environment.
  FeatureExtractor(std::vector<int> payload_radices, int actions);

  int feature_dim() const { return dim_; }
  int action_count() const { return actions_; }

  SparseFeatures features(const Observation& obs, ActionId action) const;

 private:
  enum class Layout { kOneHot, kTwoTile };
  Layout layout_;
  int actions_ = 0;
  int dim_ = 0;
  std::vector<int> radices_;  // per-payload-element cardinality (one-hot layout)
  int rows_ = 0, phases_ = 0; // two-tile layout
};

}  // namespace deskrl
