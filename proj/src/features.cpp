#include "deskrl/features.hpp"

#include <stdexcept>

namespace deskrl {

FeatureExtractor::FeatureExtractor(const GameSpec& spec) {
  actions_ = 3;  // every built-in game has 3 actions
  if (spec.name == "chain_walk") {
    layout_ = Layout::kOneHot;
    radices_ = {spec.mode == 1 ? 8 : 16};
  } else if (spec.name == "cliff_corridor") {
    layout_ = Layout::kOneHot;
    radices_ = {6, spec.mode == 2 ? 12 : 3};  // position, hazard phase
  } else if (spec.name == "key_door") {
    layout_ = Layout::kOneHot;
    radices_ = {spec.mode == 1 ? 7 : 11, 2};  // position, has_key
  } else if (spec.name == "crossing") {
    layout_ = Layout::kTwoTile;
    rows_ = (spec.mode == 1 ? 3 : 5) + 2;
    phases_ = spec.difficulty == 1 ? 4 : 2;
  } else {
    throw std::invalid_argument("no feature map for game '" + spec.name + "'");
  }
  if (layout_ == Layout::kOneHot) {
    int states = 1;
    for (int r : radices_) states *= r;
    dim_ = states * actions_;
  } else {
    dim_ = rows_ * actions_ + phases_;
  }
}

FeatureExtractor::FeatureExtractor(std::vector<int> payload_radices, int actions)
    : layout_(Layout::kOneHot), actions_(actions), radices_(std::move(payload_radices)) {
  if (actions_ < 1 || radices_.empty()) {
    throw std::invalid_argument("feature map needs actions and payload radices");
  }
  int states = 1;
  for (int r : radices_) {
    if (r < 1) throw std::invalid_argument("payload radices must be positive");
    states *= r;
  }
  dim_ = states * actions_;
}

SparseFeatures FeatureExtractor::features(const Observation& obs, ActionId action) const {
  if (action < 0 || action >= actions_) {
    throw std::invalid_argument("action out of range in feature extractor");
  }
  if (layout_ == Layout::kOneHot) {
    if (obs.payload.size() != radices_.size()) {
      throw std::invalid_argument("payload size does not match feature map");
    }
    int state = 0;
    for (std::size_t i = 0; i < radices_.size(); ++i) {
      const int v = obs.payload[i];
      if (v < 0 || v >= radices_[i]) {
        throw std::invalid_argument("payload value out of range in feature map");
      }
      state = state * radices_[i] + v;
    }
    return {state * actions_ + action};
  }
  const int row = obs.payload.at(0);
  const int phase = obs.payload.at(1);
  if (row < 0 || row >= rows_ || phase < 0 || phase >= phases_) {
    throw std::invalid_argument("payload value out of range in feature map");
  }
  return {row * actions_ + action, rows_ * actions_ + phase};
}

}  // namespace deskrl
