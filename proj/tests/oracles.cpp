#include "oracles.hpp"

#include <limits>
#include <unordered_map>

namespace deskrl::testing {

namespace {

std::string state_key(const EnvState& s) {
  std::string key = s.tag;
  key.push_back('\0');
  key.append(reinterpret_cast<const char*>(s.words.data()),
             s.words.size() * sizeof(std::int64_t));
  return key;
}

double best_from(Environment& env, std::unordered_map<std::string, double>& memo) {
  if (env.is_terminal()) return 0.0;
  const EnvState snapshot = env.save_state();
  const std::string key = state_key(snapshot);
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  double best = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < env.action_count(); ++a) {
    env.restore_state(snapshot);
    const StepResult r = env.step(a);
    const double value = r.reward + best_from(env, memo);
    if (value > best) best = value;
  }
  env.restore_state(snapshot);
  memo.emplace(std::move(key), best);
  return best;
}

}  // namespace

double optimal_return(Environment& env) {
  env.reset();
  std::unordered_map<std::string, double> memo;
  return best_from(env, memo);
}

double optimal_return_to_go(Environment& env) {
  std::unordered_map<std::string, double> memo;
  return best_from(env, memo);
}

void OracleHistoryDp::add_episode(const EpisodeTranscript& episode) {
  HistoryPath prefix;
  for (const TranscriptStep& s : episode.steps) {
    Edge& e = nodes_[prefix].edges[s.action][{s.obs_digest, s.terminal}];
    ++e.count;
    e.reward_sum += s.reward;
    prefix.emplace_back(s.action, s.obs_digest, s.terminal);
  }
  nodes_[prefix];  // terminal leaf node exists but has no edges
}

double OracleHistoryDp::node_value(const HistoryPath& prefix) const {
  const double unknown = -std::numeric_limits<double>::infinity();
  auto it = nodes_.find(prefix);
  if (it == nodes_.end()) return unknown;
  double best = unknown;
  for (const auto& [action, succ] : it->second.edges) {
    (void)succ;
    best = std::max(best, value(prefix, action));
  }
  return best;
}

double OracleHistoryDp::value(const HistoryPath& prefix, int action) const {
  const double unknown = -std::numeric_limits<double>::infinity();
  auto it = nodes_.find(prefix);
  if (it == nodes_.end()) return unknown;
  auto ait = it->second.edges.find(action);
  if (ait == it->second.edges.end() || ait->second.empty()) return unknown;
  std::int64_t n = 0;
  for (const auto& [key, e] : ait->second) {
    (void)key;
    n += e.count;
  }
  double total = 0.0;
  for (const auto& [key, e] : ait->second) {
    const auto& [digest, terminal] = key;
    double v = 0.0;
    if (!terminal) {
      HistoryPath child = prefix;
      child.emplace_back(action, digest, terminal);
      v = node_value(child);
      if (v == unknown) return unknown;
    }
    const double p = static_cast<double>(e.count) / static_cast<double>(n);
    const double r = e.reward_sum / static_cast<double>(e.count);
    total += p * (r + gamma_ * v);
  }
  return total;
}

std::vector<std::pair<HistoryPath, int>> OracleHistoryDp::known_pairs() const {
  std::vector<std::pair<HistoryPath, int>> out;
  for (const auto& [prefix, node] : nodes_) {
    for (const auto& [action, succ] : node.edges) {
      if (!succ.empty()) out.emplace_back(prefix, action);
    }
  }
  return out;
}

std::vector<StepResult> rollout(Environment& env, const std::vector<int>& actions) {
  env.reset();
  std::vector<StepResult> out;
  for (int a : actions) {
    out.push_back(env.step(a));
    if (out.back().terminal) break;
  }
  return out;
}

}  // namespace deskrl::testing
