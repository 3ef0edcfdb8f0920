#pragma once

// Test-side oracles, written independently of the library code paths they
// check. The exhaustive planner explores every action sequence through
// save/restore with memoization on the full serialized state; the history
// DP rebuilds lower-bound values from scratch using explicit history
// sequences instead of incremental digests.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "deskrl/brute.hpp"
#include "deskrl/env.hpp"

namespace deskrl::testing {

/// Exact optimum of the undiscounted episode return, by exhaustive search
/// over all action sequences. The environment must be deterministic (no
/// random draws on step). Resets the environment.
double optimal_return(Environment& env);

/// Same search, but from the environment's current state (no reset).
double optimal_return_to_go(Environment& env);

/// Identifies a history by its explicit transition sequence.
using HistoryPath = std::vector<std::tuple<int, std::uint64_t, bool>>;

/// From-scratch maximum-likelihood history DP. Feed the same transcripts in
/// any order, then query lower-bound values for any recorded prefix.
class OracleHistoryDp {
 public:
  explicit OracleHistoryDp(int action_count, double gamma)
      : action_count_(action_count), gamma_(gamma) {}

  void add_episode(const EpisodeTranscript& episode);

  /// Lower-bound value of (prefix, action); -inf when unknown.
  double value(const HistoryPath& prefix, int action) const;

  /// All recorded (prefix, action) pairs with at least one sample.
  std::vector<std::pair<HistoryPath, int>> known_pairs() const;

 private:
  struct Edge {
    std::int64_t count = 0;
    double reward_sum = 0.0;
  };
  struct Node {
    // action -> successor (digest, terminal) -> statistics
    std::map<int, std::map<std::pair<std::uint64_t, bool>, Edge>> edges;
  };

  double node_value(const HistoryPath& prefix) const;

  int action_count_;
  double gamma_;
  std::map<HistoryPath, Node> nodes_;
};

/// Replays an action sequence from reset; returns the step results.
std::vector<StepResult> rollout(Environment& env, const std::vector<int>& actions);

}  // namespace deskrl::testing
