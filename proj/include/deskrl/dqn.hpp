#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <string>
#include <vector>

#include "deskrl/agent.hpp"
#include "deskrl/rng.hpp"

namespace deskrl {

/// Fully connected one-hidden-layer network with a tanh nonlinearity,
/// one output per action. All arithmetic is plain double.
class QNetwork {
 public:
  QNetwork() = default;
  QNetwork(int inputs, int hidden, int outputs);

  /// Uniform init in +-1/sqrt(fan_in).
  void init_weights(Rng& rng);

  std::vector<double> forward(const std::vector<double>& x) const;

  int inputs() const { return inputs_; }
  int hidden() const { return hidden_; }
  int outputs() const { return outputs_; }

  /// Flat parameter view, order: w1, b1, w2, b2.
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  std::size_t param_count() const { return params_.size(); }

  friend bool operator==(const QNetwork& a, const QNetwork& b) {
    return a.inputs_ == b.inputs_ && a.hidden_ == b.hidden_ &&
           a.outputs_ == b.outputs_ && a.params_ == b.params_;
  }

  /// Flat binary serialization: dimensions, then raw parameter doubles.
  void write_binary(std::ostream& out) const;
  static QNetwork read_binary(std::istream& in);

 private:
  friend struct NetGradient;
  // offsets into params_
  std::size_t w1_at() const { return 0; }
  std::size_t b1_at() const { return static_cast<std::size_t>(hidden_) * inputs_; }
  std::size_t w2_at() const { return b1_at() + hidden_; }
  std::size_t b2_at() const { return w2_at() + static_cast<std::size_t>(outputs_) * hidden_; }

  int inputs_ = 0, hidden_ = 0, outputs_ = 0;
  std::vector<double> params_;
};

struct Transition {
  std::vector<double> obs;
  int action = 0;
  double reward = 0.0;  // stored clipped
  std::vector<double> next_obs;
  bool terminal = false;
};

/// Ring buffer with uniform sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& sample(Rng& rng) const;
  const Transition& at(std::size_t i) const { return items_[i]; }

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> items_;
};

/// Mean squared TD loss of a batch: 1/N sum 1/2 (y_i - q(s_i, a_i))^2 with
/// y_i = r_i + gamma * max_a qtilde(s'_i, a) from the target network
/// (0 bootstrap on terminal transitions).
double dqn_batch_loss(const QNetwork& online, const QNetwork& target,
                      const std::vector<Transition>& batch, double gamma);

/// Gradient of dqn_batch_loss w.r.t. the online parameters (the target is
/// a constant). Layout matches QNetwork::params().
std::vector<double> dqn_batch_gradient(const QNetwork& online, const QNetwork& target,
                                       const std::vector<Transition>& batch,
                                       double gamma);

/// One SGD step on the batch loss: params -= alpha * gradient.
void dqn_update(QNetwork& online, const QNetwork& target,
                const std::vector<Transition>& batch, double alpha, double gamma);

/// target <- online, bit-exact.
void sync_target(const QNetwork& online, QNetwork& target);

struct DqnConfig {
  int hidden = 32;
  double alpha = 0.1;             // SGD step-size (desk-scale default)
  double gamma = 0.99;
  double eps_start = 1.0;
  double eps_end = 0.01;
  std::int64_t anneal_frames = 10000;
  std::int64_t replay_capacity = 10000;
  std::int64_t warmup_decisions = 1000;  // random policy, no updates before this
  int batch_size = 32;
  int update_every = 4;                  // decisions between minibatch updates
  std::int64_t target_sync_every = 1000; // decisions between target syncs
  std::string optimizer = "sgd";         // "sgd" or "rmsprop"
  double rms_alpha = 0.00025;
  double rms_momentum = 0.95;
  double rms_floor = 0.01;
  double obs_scale = 0.125;              // payload scaling before the net
  int history_length = 1;                // observations concatenated as net input
};

/// Minimal DQN-style learner on vector observations: experience replay,
/// a separately synchronized target network, sign-clipped training rewards
/// and a linearly annealed exploration rate. Reported scores are raw.
class DqnAgent : public Agent {
 public:
  DqnAgent(int obs_size, int action_count, DqnConfig cfg, std::uint64_t seed);

  EpisodeStats play_episode(Environment& env) override;
  std::map<std::string, double> diagnostics() const override;

  double epsilon_at(std::int64_t frames) const;
  ActionId select_action(const std::vector<double>& x);

  const QNetwork& online() const { return online_; }
  const QNetwork& target() const { return target_; }
  const ReplayBuffer& replay() const { return replay_; }
  std::int64_t updates_applied() const { return updates_; }
  std::int64_t syncs_applied() const { return syncs_; }
  std::int64_t decisions() const { return decisions_; }
  std::int64_t frames_seen() const { return frames_; }

  std::vector<double> encode(const Observation& obs) const;

  double greedy_return(Environment& env) const;

 private:
  void maybe_learn();
  std::vector<double> stacked(const std::deque<std::vector<double>>& history) const;

  DqnConfig cfg_;
  int action_count_;
  QNetwork online_, target_;
  ReplayBuffer replay_;
  Rng rng_;
  std::int64_t decisions_ = 0;
  std::int64_t frames_ = 0;
  std::int64_t updates_ = 0;
  std::int64_t syncs_ = 0;
  // rmsprop state
  std::vector<double> g_avg_, g2_avg_;
};

}  // namespace deskrl
