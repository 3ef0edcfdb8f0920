#include "deskrl/sarsa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "deskrl/ioutil.hpp"

namespace deskrl {

SarsaLambda::SarsaLambda(FeatureExtractor extractor, SarsaConfig cfg, std::uint64_t seed)
    : extractor_(std::move(extractor)), cfg_(cfg), rng_(seed),
      theta_(extractor_.feature_dim(), 0.0) {
  if (cfg_.gamma < 0 || cfg_.gamma > 1 || cfg_.lambda < 0 || cfg_.lambda > 1) {
    throw std::invalid_argument("gamma and lambda must be in [0, 1]");
  }
}

double SarsaLambda::q_value(const SparseFeatures& phi) const {
  double q = 0.0;
  for (int i : phi) q += theta_[i];
  return q;
}

double SarsaLambda::effective_alpha() const {
  return max_active_seen_ > 0 ? cfg_.alpha / max_active_seen_ : cfg_.alpha;
}

void SarsaLambda::update(const SparseFeatures& phi_t, double reward,
                         const SparseFeatures& phi_next, bool terminal) {
  if (max_active_seen_ == 0) max_active_seen_ = static_cast<int>(phi_t.size());
  max_active_seen_ = std::max(max_active_seen_, static_cast<int>(phi_t.size()));

  const double q_t = q_value(phi_t);
  const double q_next = terminal ? 0.0 : q_value(phi_next);
  const double delta = reward + cfg_.gamma * q_next - q_t;

  // e_t = gamma*lambda*e_{t-1} + phi_t, merged in index order.
  const double decay = cfg_.gamma * cfg_.lambda;
  std::vector<std::pair<int, double>> merged;
  merged.reserve(trace_.size() + phi_t.size());
  std::size_t ti = 0, fi = 0;
  while (ti < trace_.size() || fi < phi_t.size()) {
    if (fi == phi_t.size() ||
        (ti < trace_.size() && trace_[ti].first < phi_t[fi])) {
      merged.emplace_back(trace_[ti].first, trace_[ti].second * decay);
      ++ti;
    } else if (ti == trace_.size() || phi_t[fi] < trace_[ti].first) {
      merged.emplace_back(phi_t[fi], 1.0);
      ++fi;
    } else {
      merged.emplace_back(phi_t[fi], trace_[ti].second * decay + 1.0);
      ++ti;
      ++fi;
    }
  }
  trace_ = std::move(merged);

  const double step = effective_alpha() * delta;
  for (const auto& [i, e] : trace_) {
    theta_[i] += step * e;
    if (!std::isfinite(theta_[i])) {
      throw DivergenceError("sarsa weights diverged (non-finite value at index " +
                            std::to_string(i) + ")");
    }
  }

  trace_.erase(std::remove_if(trace_.begin(), trace_.end(),
                              [&](const auto& kv) {
                                return std::abs(kv.second) < cfg_.trace_threshold;
                              }),
               trace_.end());
  ++updates_;
}

ActionId SarsaLambda::select_action(const Observation& obs) {
  const int n = extractor_.action_count();
  if (rng_.uniform() < cfg_.epsilon) return rng_.uniform_int(n);
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> q(n);
  for (int a = 0; a < n; ++a) {
    q[a] = q_value(extractor_.features(obs, a));
    best = std::max(best, q[a]);
  }
  int ties = 0;
  for (int a = 0; a < n; ++a) {
    if (q[a] == best) ++ties;
  }
  int pick = ties > 1 ? rng_.uniform_int(ties) : 0;
  for (int a = 0; a < n; ++a) {
    if (q[a] == best && pick-- == 0) return a;
  }
  return n - 1;  // unreachable
}

EpisodeStats SarsaLambda::play_episode(Environment& env) {
  Observation obs = env.reset();
  if (cfg_.reset_traces_each_episode) trace_.clear();
  EpisodeStats stats;
  ActionId a = select_action(obs);
  SparseFeatures phi = extractor_.features(obs, a);
  while (true) {
    const StepResult r = env.step(a);
    ++stats.decisions;
    if (r.terminal) {
      update(phi, r.reward, {}, true);
      break;
    }
    const ActionId a_next = select_action(r.observation);
    SparseFeatures phi_next = extractor_.features(r.observation, a_next);
    update(phi, r.reward, phi_next, false);
    a = a_next;
    phi = std::move(phi_next);
  }
  stats.frames = env.episode_frames();
  stats.score = env.episode_score();
  return stats;
}

double SarsaLambda::greedy_return(Environment& env) const {
  Observation obs = env.reset();
  bool terminal = false;
  while (!terminal) {
    const int n = extractor_.action_count();
    int best_a = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < n; ++a) {
      const double q = q_value(extractor_.features(obs, a));
      if (q > best) {
        best = q;
        best_a = a;
      }
    }
    const StepResult r = env.step(best_a);
    obs = r.observation;
    terminal = r.terminal;
  }
  return env.episode_score();
}

std::map<std::string, double> SarsaLambda::diagnostics() const {
  return {{"updates", static_cast<double>(updates_)},
          {"effective_alpha", effective_alpha()},
          {"trace_active", static_cast<double>(trace_.size())}};
}

void SarsaLambda::write_weights_csv(std::ostream& out) const {
  out << "index,weight\n";
  for (std::size_t i = 0; i < theta_.size(); ++i) {
    if (theta_[i] != 0.0) out << i << "," << fmt_double(theta_[i]) << "\n";
  }
}

}  // namespace deskrl
