#include "deskrl/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace deskrl {

QNetwork::QNetwork(int inputs, int hidden, int outputs)
    : inputs_(inputs), hidden_(hidden), outputs_(outputs) {
  if (inputs < 1 || hidden < 1 || outputs < 1) {
    throw std::invalid_argument("network dimensions must be positive");
  }
  params_.assign(static_cast<std::size_t>(hidden) * inputs + hidden +
                     static_cast<std::size_t>(outputs) * hidden + outputs,
                 0.0);
}

void QNetwork::init_weights(Rng& rng) {
  const double s1 = 1.0 / std::sqrt(static_cast<double>(inputs_));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden_));
  double* w1 = params_.data() + w1_at();
  for (int i = 0; i < hidden_ * inputs_; ++i) w1[i] = (2.0 * rng.uniform() - 1.0) * s1;
  double* b1 = params_.data() + b1_at();
  for (int i = 0; i < hidden_; ++i) b1[i] = (2.0 * rng.uniform() - 1.0) * s1;
  double* w2 = params_.data() + w2_at();
  for (int i = 0; i < outputs_ * hidden_; ++i) w2[i] = (2.0 * rng.uniform() - 1.0) * s2;
  double* b2 = params_.data() + b2_at();
  for (int i = 0; i < outputs_; ++i) b2[i] = (2.0 * rng.uniform() - 1.0) * s2;
}

std::vector<double> QNetwork::forward(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != inputs_) {
    throw std::invalid_argument("input size does not match network");
  }
  const double* w1 = params_.data() + w1_at();
  const double* b1 = params_.data() + b1_at();
  const double* w2 = params_.data() + w2_at();
  const double* b2 = params_.data() + b2_at();
  std::vector<double> h(hidden_);
  for (int j = 0; j < hidden_; ++j) {
    double z = b1[j];
    const double* row = w1 + static_cast<std::size_t>(j) * inputs_;
    for (int i = 0; i < inputs_; ++i) z += row[i] * x[i];
    h[j] = std::tanh(z);
  }
  std::vector<double> q(outputs_);
  for (int a = 0; a < outputs_; ++a) {
    double z = b2[a];
    const double* row = w2 + static_cast<std::size_t>(a) * hidden_;
    for (int j = 0; j < hidden_; ++j) z += row[j] * h[j];
    q[a] = z;
  }
  return q;
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

const Transition& ReplayBuffer::sample(Rng& rng) const {
  if (items_.empty()) throw std::logic_error("sampling from empty replay buffer");
  return items_[rng.uniform_int(static_cast<int>(items_.size()))];
}

namespace {

double target_value(const QNetwork& target, const Transition& t, double gamma) {
  if (t.terminal) return t.reward;
  const std::vector<double> q = target.forward(t.next_obs);
  double best = q[0];
  for (double v : q) best = std::max(best, v);
  return t.reward + gamma * best;
}

}  // namespace

double dqn_batch_loss(const QNetwork& online, const QNetwork& target,
                      const std::vector<Transition>& batch, double gamma) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  double loss = 0.0;
  for (const Transition& t : batch) {
    const double y = target_value(target, t, gamma);
    const double q = online.forward(t.obs)[t.action];
    loss += 0.5 * (y - q) * (y - q);
  }
  return loss / static_cast<double>(batch.size());
}

std::vector<double> dqn_batch_gradient(const QNetwork& online, const QNetwork& target,
                                       const std::vector<Transition>& batch,
                                       double gamma) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  const int in = online.inputs(), hid = online.hidden(), out = online.outputs();
  std::vector<double> grad(online.param_count(), 0.0);
  const double* p = online.params().data();
  const double* w1 = p;
  const double* b1 = p + static_cast<std::size_t>(hid) * in;
  const double* w2 = b1 + hid;
  double* gw1 = grad.data();
  double* gb1 = grad.data() + static_cast<std::size_t>(hid) * in;
  double* gw2 = gb1 + hid;
  double* gb2 = gw2 + static_cast<std::size_t>(out) * hid;

  std::vector<double> h(hid);
  for (const Transition& t : batch) {
    // forward, keeping the hidden activations
    for (int j = 0; j < hid; ++j) {
      double z = b1[j];
      const double* row = w1 + static_cast<std::size_t>(j) * in;
      for (int i = 0; i < in; ++i) z += row[i] * t.obs[i];
      h[j] = std::tanh(z);
    }
    const int a = t.action;
    double q = p[static_cast<std::size_t>(hid) * in + hid +
                 static_cast<std::size_t>(out) * hid + a];  // b2[a]
    const double* w2row = w2 + static_cast<std::size_t>(a) * hid;
    for (int j = 0; j < hid; ++j) q += w2row[j] * h[j];

    const double y = target_value(target, t, gamma);
    // dLoss/dq = -(y - q); only the chosen action's head contributes.
    const double dq = -(y - q);
    gb2[a] += dq;
    double* gw2row = gw2 + static_cast<std::size_t>(a) * hid;
    for (int j = 0; j < hid; ++j) {
      gw2row[j] += dq * h[j];
      const double dz = dq * w2row[j] * (1.0 - h[j] * h[j]);
      gb1[j] += dz;
      double* gw1row = gw1 + static_cast<std::size_t>(j) * in;
      for (int i = 0; i < in; ++i) gw1row[i] += dz * t.obs[i];
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double& g : grad) g *= inv;
  return grad;
}

void dqn_update(QNetwork& online, const QNetwork& target,
                const std::vector<Transition>& batch, double alpha, double gamma) {
  const std::vector<double> grad = dqn_batch_gradient(online, target, batch, gamma);
  auto& p = online.params();
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] -= alpha * grad[i];
    if (!std::isfinite(p[i])) {
      throw DivergenceError("dqn weights diverged (non-finite parameter)");
    }
  }
}

void sync_target(const QNetwork& online, QNetwork& target) { target = online; }

DqnAgent::DqnAgent(int obs_size, int action_count, DqnConfig cfg, std::uint64_t seed)
    : cfg_(cfg), action_count_(action_count),
      online_(obs_size * std::max(1, cfg.history_length), cfg.hidden, action_count),
      replay_(static_cast<std::size_t>(cfg.replay_capacity)), rng_(seed) {
  if (cfg_.optimizer != "sgd" && cfg_.optimizer != "rmsprop") {
    throw std::invalid_argument("unknown optimizer '" + cfg_.optimizer + "'");
  }
  if (cfg_.history_length < 1) {
    throw std::invalid_argument("history_length must be >= 1");
  }
  online_.init_weights(rng_);
  target_ = online_;
  if (cfg_.optimizer == "rmsprop") {
    g_avg_.assign(online_.param_count(), 0.0);
    g2_avg_.assign(online_.param_count(), 0.0);
  }
}

double DqnAgent::epsilon_at(std::int64_t frames) const {
  if (cfg_.anneal_frames <= 0 || frames >= cfg_.anneal_frames) return cfg_.eps_end;
  const double f = static_cast<double>(frames) / static_cast<double>(cfg_.anneal_frames);
  return cfg_.eps_start + (cfg_.eps_end - cfg_.eps_start) * f;
}

std::vector<double> DqnAgent::encode(const Observation& obs) const {
  std::vector<double> x(obs.payload.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = obs.payload[i] * cfg_.obs_scale;
  return x;
}

ActionId DqnAgent::select_action(const std::vector<double>& x) {
  const bool warmup = decisions_ < cfg_.warmup_decisions;
  const double eps = warmup ? 1.0 : epsilon_at(frames_);
  if (rng_.uniform() < eps) return rng_.uniform_int(action_count_);
  const std::vector<double> q = online_.forward(x);
  double best = q[0];
  for (double v : q) best = std::max(best, v);
  int ties = 0;
  for (double v : q) {
    if (v == best) ++ties;
  }
  int pick = ties > 1 ? rng_.uniform_int(ties) : 0;
  for (int a = 0; a < action_count_; ++a) {
    if (q[a] == best && pick-- == 0) return a;
  }
  return action_count_ - 1;  // unreachable
}

void DqnAgent::maybe_learn() {
  if (decisions_ % cfg_.target_sync_every == 0) {
    sync_target(online_, target_);
    ++syncs_;
  }
  if (decisions_ < cfg_.warmup_decisions) return;
  if (decisions_ % cfg_.update_every == 0 &&
      replay_.size() >= static_cast<std::size_t>(cfg_.batch_size)) {
    std::vector<Transition> batch;
    batch.reserve(cfg_.batch_size);
    for (int i = 0; i < cfg_.batch_size; ++i) batch.push_back(replay_.sample(rng_));
    if (cfg_.optimizer == "sgd") {
      dqn_update(online_, target_, batch, cfg_.alpha, cfg_.gamma);
    } else {
      const std::vector<double> grad =
          dqn_batch_gradient(online_, target_, batch, cfg_.gamma);
      auto& p = online_.params();
      for (std::size_t i = 0; i < p.size(); ++i) {
        g_avg_[i] = cfg_.rms_momentum * g_avg_[i] + (1.0 - cfg_.rms_momentum) * grad[i];
        g2_avg_[i] = cfg_.rms_momentum * g2_avg_[i] +
                     (1.0 - cfg_.rms_momentum) * grad[i] * grad[i];
        const double denom =
            std::sqrt(g2_avg_[i] - g_avg_[i] * g_avg_[i] + cfg_.rms_floor);
        p[i] -= cfg_.rms_alpha * grad[i] / denom;
        if (!std::isfinite(p[i])) {
          throw DivergenceError("dqn weights diverged (non-finite parameter)");
        }
      }
    }
    ++updates_;
  }
}

EpisodeStats DqnAgent::play_episode(Environment& env) {
  Observation obs = env.reset();
  std::vector<double> x = encode(obs);
  EpisodeStats stats;
  bool terminal = false;
  while (!terminal) {
    const ActionId a = select_action(x);
    const StepResult r = env.step(a);
    ++decisions_;
    ++stats.decisions;
    frames_ += r.frames_consumed;
    const double clipped = r.reward > 0 ? 1.0 : (r.reward < 0 ? -1.0 : 0.0);
    std::vector<double> x_next = encode(r.observation);
    replay_.push({x, a, clipped, x_next, r.terminal});
    x = std::move(x_next);
    terminal = r.terminal;
    maybe_learn();
  }
  stats.frames = env.episode_frames();
  stats.score = env.episode_score();
  return stats;
}

double DqnAgent::greedy_return(Environment& env) const {
  Observation obs = env.reset();
  bool terminal = false;
  while (!terminal) {
    const std::vector<double> q = online_.forward(encode(obs));
    int best_a = 0;
    for (int a = 1; a < action_count_; ++a) {
      if (q[a] > q[best_a]) best_a = a;
    }
    const StepResult r = env.step(best_a);
    obs = r.observation;
    terminal = r.terminal;
  }
  return env.episode_score();
}

std::map<std::string, double> DqnAgent::diagnostics() const {
  return {{"decisions", static_cast<double>(decisions_)},
          {"updates", static_cast<double>(updates_)},
          {"target_syncs", static_cast<double>(syncs_)},
          {"replay_size", static_cast<double>(replay_.size())},
          {"epsilon", epsilon_at(frames_)}};
}

}  // namespace deskrl
