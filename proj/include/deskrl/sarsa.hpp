#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "deskrl/agent.hpp"
#include "deskrl/features.hpp"
#include "deskrl/rng.hpp"

namespace deskrl {

struct SarsaConfig {
  double alpha = 0.5;
  double gamma = 0.99;
  double lambda = 0.9;
  double epsilon = 0.01;
  double trace_threshold = 0.01;
  bool reset_traces_each_episode = true;
};

/// Sarsa(lambda) with sparse binary features and accumulating traces.
/// The base step-size is divided by the largest number of active features
/// seen so far, so the effective step-size never increases over a run.
class SarsaLambda : public Agent {
 public:
  SarsaLambda(FeatureExtractor extractor, SarsaConfig cfg, std::uint64_t seed);

  /// One on-policy update. phi_next must describe the (state, action)
  /// actually selected next; it is ignored when terminal is set.
  void update(const SparseFeatures& phi_t, double reward,
              const SparseFeatures& phi_next, bool terminal);

  ActionId select_action(const Observation& obs);

  double q_value(const SparseFeatures& phi) const;
  const std::vector<double>& weights() const { return theta_; }
  std::vector<double>& mutable_weights() { return theta_; }
  const std::vector<std::pair<int, double>>& trace() const { return trace_; }
  double effective_alpha() const;
  int max_active_seen() const { return max_active_seen_; }
  void clear_trace() { trace_.clear(); }
  const FeatureExtractor& extractor() const { return extractor_; }
  /// Live hyperparameters; tests and schedules may adjust them mid-run.
  SarsaConfig& mutable_config() { return cfg_; }

  /// Writes the weight vector as CSV rows (index,weight) for post-hoc
  /// analysis. Zero weights are skipped.
  void write_weights_csv(std::ostream& out) const;

  EpisodeStats play_episode(Environment& env) override;
  std::map<std::string, double> diagnostics() const override;

  /// Greedy return of the current weights (no exploration, no learning,
  /// first-index tie-breaking).
  double greedy_return(Environment& env) const;

 private:
  FeatureExtractor extractor_;
  SarsaConfig cfg_;
  Rng rng_;
  std::vector<double> theta_;
  std::vector<std::pair<int, double>> trace_;  // sorted by index
  int max_active_seen_ = 0;
  std::int64_t updates_ = 0;
};

}  // namespace deskrl
