#pragma once

#include <cstdint>
#include <limits>
#include <unordered_map>
#include <vector>

#include "deskrl/agent.hpp"
#include "deskrl/digest.hpp"
#include "deskrl/env.hpp"
#include "deskrl/rng.hpp"

namespace deskrl {

inline constexpr double kUnknownValue = -std::numeric_limits<double>::infinity();

/// 64-bit digest of an observation (payload, lives, reward, terminal flag).
/// History-tree nodes branch on this digest rather than the raw payload.
std::uint64_t observation_digest(const Observation& obs, bool terminal);

struct TranscriptStep {
  ActionId action = 0;
  std::uint64_t obs_digest = 0;
  double reward = 0.0;
  bool terminal = false;
};

/// One recorded episode: the (action, observation-digest, reward) chain
/// from the episode root to its end.
struct EpisodeTranscript {
  std::vector<TranscriptStep> steps;
};

struct SuccessorStat {
  std::uint64_t obs_digest = 0;
  bool terminal = false;
  Digest128 child;
  std::int64_t count = 0;
  double reward_sum = 0.0;
};

struct ActionStat {
  std::int64_t count = 0;  // n(h, a)
  double q_hat = kUnknownValue;
  std::vector<SuccessorStat> successors;
};

struct HistoryNode {
  std::int64_t visits = 0;  // n(h)
  int depth = 0;
  std::vector<ActionStat> actions;
};

struct BruteConfig {
  double gamma = 1.0;
  // Exploration schedule eps(h) = min(numerator / ln(n(h) + offset), 1).
  double epsilon_numerator = 0.005;
  double epsilon_offset = 2.0;
};

/// Partial history tree with per-node maximum-likelihood transition and
/// reward models and lower-bound action values. Unknown history-action
/// pairs are valued -inf; terminal successors are absorbing with value 0.
class HistoryTree {
 public:
  HistoryTree(int action_count, BruteConfig cfg = {});

  Digest128 root_key() const { return empty_history_key(); }
  int action_count() const { return action_count_; }

  /// Node for a history key, created on first touch.
  HistoryNode& node(const Digest128& key, int depth);
  const HistoryNode* find(const Digest128& key) const;

  /// Stored lower-bound value, or -inf for unvisited pairs.
  double value(const Digest128& h, ActionId a) const;

  /// eps(h)-greedy action with uniform tie-breaking among maxima.
  ActionId select_action(const Digest128& h, int depth, Rng& rng);

  double epsilon_for(std::int64_t visits) const;

  /// Folds one episode into the tree: tallies along the path, then a
  /// backward sweep recomputing q_hat at each on-path pair from the
  /// current maximum-likelihood estimates. O(T) per episode.
  void update(const EpisodeTranscript& episode);

  std::size_t node_count() const { return nodes_.size(); }
  int max_depth() const { return max_depth_; }
  std::int64_t total_visits() const { return total_visits_; }
  double gamma() const { return cfg_.gamma; }

 private:
  double recompute_q(const ActionStat& stat) const;

  int action_count_;
  BruteConfig cfg_;
  std::unordered_map<Digest128, HistoryNode, Digest128Hash> nodes_;
  int max_depth_ = 0;
  std::int64_t total_visits_ = 0;
};

/// The episodic agent: plays with the narrow-exploration policy, records
/// a transcript, and folds it into the tree when the episode ends.
class BruteAgent : public Agent {
 public:
  BruteAgent(int action_count, BruteConfig cfg, std::uint64_t seed)
      : tree_(action_count, cfg), rng_(seed) {}

  EpisodeStats play_episode(Environment& env) override;
  std::map<std::string, double> diagnostics() const override;

  HistoryTree& tree() { return tree_; }
  const HistoryTree& tree() const { return tree_; }

  /// Greedy rollout (no exploration, first-index tie-breaking); does not
  /// learn. Used to inspect the best trajectory found so far.
  double greedy_return(Environment& env) const;

 private:
  HistoryTree tree_;
  Rng rng_;
};

}  // namespace deskrl
