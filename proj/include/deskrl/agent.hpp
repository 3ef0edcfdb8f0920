#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include "deskrl/env.hpp"

namespace deskrl {

struct EpisodeStats {
  double score = 0.0;        // raw (untransformed) episode score
  std::int64_t decisions = 0;
  std::int64_t frames = 0;
};

/// A learning agent. One instance per trial; instances are movable
/// between threads but never shared.
class Agent {
 public:
  virtual ~Agent() = default;

  /// Plays a single episode to termination, learning as it goes.
  virtual EpisodeStats play_episode(Environment& env) = 0;

  /// Internal counters exported into milestone diagnostics.
  virtual std::map<std::string, double> diagnostics() const { return {}; }
};

/// Thrown when a learner's parameters stop being finite.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace deskrl
