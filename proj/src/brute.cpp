#include "deskrl/brute.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace deskrl {

std::uint64_t observation_digest(const Observation& obs, bool terminal) {
  Fnv1a64 h;
  h.add(static_cast<std::uint64_t>(obs.payload.size()));
  for (auto v : obs.payload) h.add(static_cast<std::uint64_t>(static_cast<std::int64_t>(v)));
  h.add(obs.lives ? 0x10000ULL + static_cast<std::uint64_t>(*obs.lives) : 0xdeadULL);
  std::uint64_t reward_bits;
  std::memcpy(&reward_bits, &obs.score_delta, sizeof(reward_bits));
  h.add(reward_bits);
  h.add(terminal ? 1 : 0);
  return h.value();
}

HistoryTree::HistoryTree(int action_count, BruteConfig cfg)
    : action_count_(action_count), cfg_(cfg) {
  if (action_count_ < 1) throw std::invalid_argument("action_count must be >= 1");
}

HistoryNode& HistoryTree::node(const Digest128& key, int depth) {
  auto [it, inserted] = nodes_.try_emplace(key);
  if (inserted) {
    it->second.depth = depth;
    it->second.actions.resize(action_count_);
    max_depth_ = std::max(max_depth_, depth);
  }
  return it->second;
}

const HistoryNode* HistoryTree::find(const Digest128& key) const {
  auto it = nodes_.find(key);
  return it == nodes_.end() ? nullptr : &it->second;
}

double HistoryTree::value(const Digest128& h, ActionId a) const {
  if (a < 0 || a >= action_count_) {
    throw std::invalid_argument("action " + std::to_string(a) + " out of range");
  }
  const HistoryNode* n = find(h);
  if (!n) return kUnknownValue;
  return n->actions[a].q_hat;
}

double HistoryTree::epsilon_for(std::int64_t visits) const {
  const double denom = std::log(static_cast<double>(visits) + cfg_.epsilon_offset);
  if (denom <= 0.0) return 1.0;
  return std::min(cfg_.epsilon_numerator / denom, 1.0);
}

ActionId HistoryTree::select_action(const Digest128& h, int depth, Rng& rng) {
  HistoryNode& n = node(h, depth);
  if (rng.uniform() < epsilon_for(n.visits)) {
    return rng.uniform_int(action_count_);
  }
  double best = kUnknownValue;
  for (const auto& a : n.actions) best = std::max(best, a.q_hat);
  int ties = 0;
  for (const auto& a : n.actions) {
    if (a.q_hat == best) ++ties;
  }
  int pick = rng.uniform_int(ties);
  for (int a = 0; a < action_count_; ++a) {
    if (n.actions[a].q_hat == best && pick-- == 0) return a;
  }
  return action_count_ - 1;  // unreachable
}

void HistoryTree::update(const EpisodeTranscript& episode) {
  if (episode.steps.empty()) {
    throw std::invalid_argument("empty episode transcript");
  }
  // Forward pass: visit tallies and maximum-likelihood statistics.
  std::vector<Digest128> keys;
  keys.reserve(episode.steps.size() + 1);
  Digest128 key = root_key();
  keys.push_back(key);
  for (std::size_t t = 0; t < episode.steps.size(); ++t) {
    const TranscriptStep& s = episode.steps[t];
    if (s.action < 0 || s.action >= action_count_) {
      throw std::invalid_argument("transcript action out of range for this tree");
    }
    HistoryNode& n = node(key, static_cast<int>(t));
    ++n.visits;
    ++total_visits_;
    ActionStat& stat = n.actions[s.action];
    ++stat.count;
    const Digest128 child = combine(key, s.action, s.obs_digest);
    auto it = std::find_if(stat.successors.begin(), stat.successors.end(),
                           [&](const SuccessorStat& c) {
                             return c.obs_digest == s.obs_digest && c.terminal == s.terminal;
                           });
    if (it == stat.successors.end()) {
      stat.successors.push_back({s.obs_digest, s.terminal, child, 1, s.reward});
    } else {
      ++it->count;
      it->reward_sum += s.reward;
    }
    key = child;
    keys.push_back(key);
  }
  // The episode-end node counts a visit too (it is reached, never acted from).
  HistoryNode& leaf = node(key, static_cast<int>(episode.steps.size()));
  ++leaf.visits;
  ++total_visits_;

  // Backward sweep along the path only.
  for (std::size_t t = episode.steps.size(); t-- > 0;) {
    HistoryNode& n = node(keys[t], static_cast<int>(t));
    ActionStat& stat = n.actions[episode.steps[t].action];
    stat.q_hat = recompute_q(stat);
  }
}

double HistoryTree::recompute_q(const ActionStat& stat) const {
  if (stat.count == 0) return kUnknownValue;
  double total = 0.0;
  for (const SuccessorStat& s : stat.successors) {
    double v = 0.0;  // terminal successors are zero-valued and absorbing
    if (!s.terminal) {
      const HistoryNode* child = find(s.child);
      v = kUnknownValue;
      if (child) {
        for (const auto& a : child->actions) v = std::max(v, a.q_hat);
      }
      // An unevaluated successor poisons the mixture: the pair stays a
      // lower bound of -inf until every sampled child has a known value.
      if (v == kUnknownValue) return kUnknownValue;
    }
    const double p = static_cast<double>(s.count) / static_cast<double>(stat.count);
    const double r = s.reward_sum / static_cast<double>(s.count);
    total += p * (r + cfg_.gamma * v);
  }
  return total;
}

EpisodeStats BruteAgent::play_episode(Environment& env) {
  env.reset();
  EpisodeTranscript transcript;
  Digest128 key = tree_.root_key();
  int depth = 0;
  EpisodeStats stats;
  bool terminal = false;
  while (!terminal) {
    const ActionId a = tree_.select_action(key, depth, rng_);
    const StepResult r = env.step(a);
    const std::uint64_t digest = observation_digest(r.observation, r.terminal);
    transcript.steps.push_back({a, digest, r.reward, r.terminal});
    key = combine(key, a, digest);
    ++depth;
    ++stats.decisions;
    terminal = r.terminal;
  }
  tree_.update(transcript);
  stats.frames = env.episode_frames();
  stats.score = env.episode_score();
  return stats;
}

double BruteAgent::greedy_return(Environment& env) const {
  env.reset();
  Digest128 key = tree_.root_key();
  bool terminal = false;
  while (!terminal) {
    const HistoryNode* n = tree_.find(key);
    int best_action = 0;
    double best = kUnknownValue;
    if (n) {
      for (int a = 0; a < tree_.action_count(); ++a) {
        if (n->actions[a].q_hat > best) {
          best = n->actions[a].q_hat;
          best_action = a;
        }
      }
    }
    const StepResult r = env.step(best_action);
    key = combine(key, best_action, observation_digest(r.observation, r.terminal));
    terminal = r.terminal;
  }
  return env.episode_score();
}

std::map<std::string, double> BruteAgent::diagnostics() const {
  return {{"tree_nodes", static_cast<double>(tree_.node_count())},
          {"tree_max_depth", static_cast<double>(tree_.max_depth())},
          {"tree_total_visits", static_cast<double>(tree_.total_visits())}};
}

}  // namespace deskrl
