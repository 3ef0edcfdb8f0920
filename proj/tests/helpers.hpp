#pragma once

// Small test-only environments and reference agents.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "deskrl/env.hpp"
#include "deskrl/rng.hpp"
#include "deskrl/sarsa.hpp"

namespace deskrl::testing {

/// Counts how often each action index is executed. Never terminates
/// before the frame cap; rewards are all zero.
class CountingEnv final : public Environment {
 public:
  explicit CountingEnv(int actions, std::int64_t cap = 1 << 30)
      : spec_{"counting", 1, 1}, actions_(actions), cap_(cap), counts_(actions, 0) {}

  int action_count() const override { return actions_; }
  int observation_size() const override { return 1; }
  std::int64_t max_episode_frames() const override { return cap_; }
  const GameSpec& spec() const override { return spec_; }
  std::string state_tag() const override { return "counting"; }
  std::int64_t episode_frames() const override { return frames_; }
  double episode_score() const override { return 0.0; }
  bool is_terminal() const override { return terminal_; }

  Observation reset() override {
    frames_ = 0;
    terminal_ = false;
    return Observation{{0}, std::nullopt, 0.0};
  }

  StepResult step(ActionId a) override {
    ++counts_.at(a);
    ++frames_;
    terminal_ = frames_ >= cap_;
    return {Observation{{0}, std::nullopt, 0.0}, 0.0, terminal_, 1};
  }

  EnvState save_state() const override {
    return {state_tag(), {frames_, terminal_ ? 1 : 0}};
  }
  void restore_state(const EnvState& s) override {
    frames_ = s.words.at(0);
    terminal_ = s.words.at(1) != 0;
  }

  const std::vector<std::int64_t>& counts() const { return counts_; }

 private:
  GameSpec spec_;
  int actions_;
  std::int64_t cap_;
  std::int64_t frames_ = 0;
  bool terminal_ = false;
  std::vector<std::int64_t> counts_;
};

/// Replays a scripted reward stream, one value per step.
class ScriptedRewardEnv final : public Environment {
 public:
  explicit ScriptedRewardEnv(std::vector<double> rewards)
      : spec_{"scripted", 1, 1}, rewards_(std::move(rewards)) {}

  int action_count() const override { return 1; }
  int observation_size() const override { return 1; }
  std::int64_t max_episode_frames() const override {
    return static_cast<std::int64_t>(rewards_.size());
  }
  const GameSpec& spec() const override { return spec_; }
  std::string state_tag() const override { return "scripted"; }
  std::int64_t episode_frames() const override { return at_; }
  double episode_score() const override { return score_; }
  bool is_terminal() const override { return at_ >= static_cast<std::int64_t>(rewards_.size()); }

  Observation reset() override {
    at_ = 0;
    score_ = 0.0;
    return Observation{{0}, std::nullopt, 0.0};
  }

  StepResult step(ActionId) override {
    const double r = rewards_.at(at_++);
    score_ += r;
    return {Observation{{0}, std::nullopt, r}, r, is_terminal(), 1};
  }

  EnvState save_state() const override { return {state_tag(), {at_}}; }
  void restore_state(const EnvState& s) override { at_ = s.words.at(0); }

 private:
  GameSpec spec_;
  std::vector<double> rewards_;
  std::int64_t at_ = 0;
  double score_ = 0.0;
};

/// Three cells, start at 0, +1 and terminal at cell 2. Actions NOOP/LEFT/RIGHT.
class Chain3Env final : public Environment {
 public:
  explicit Chain3Env(std::int64_t cap = 30) : spec_{"chain3", 1, 1}, cap_(cap) {}

  int action_count() const override { return 3; }
  int observation_size() const override { return 1; }
  std::int64_t max_episode_frames() const override { return cap_; }
  const GameSpec& spec() const override { return spec_; }
  std::string state_tag() const override { return "chain3"; }
  std::int64_t episode_frames() const override { return frames_; }
  double episode_score() const override { return score_; }
  bool is_terminal() const override { return terminal_; }

  Observation reset() override {
    pos_ = 0;
    frames_ = 0;
    score_ = 0;
    terminal_ = false;
    return {{pos_}, std::nullopt, 0.0};
  }

  StepResult step(ActionId a) override {
    if (terminal_) throw std::logic_error("step on terminal");
    ++frames_;
    if (a == 1) pos_ = std::max(0, pos_ - 1);
    if (a == 2) pos_ = std::min(2, pos_ + 1);
    double reward = 0.0;
    if (pos_ == 2) {
      reward = 1.0;
      terminal_ = true;
    }
    terminal_ = terminal_ || frames_ >= cap_;
    score_ += reward;
    return {{{pos_}, std::nullopt, reward}, reward, terminal_, 1};
  }

  EnvState save_state() const override {
    return {state_tag(), {pos_, frames_, terminal_ ? 1 : 0}};
  }
  void restore_state(const EnvState& s) override {
    pos_ = static_cast<std::int32_t>(s.words[0]);
    frames_ = s.words[1];
    terminal_ = s.words[2] != 0;
  }

 private:
  GameSpec spec_;
  std::int64_t cap_;
  std::int32_t pos_ = 0;
  std::int64_t frames_ = 0;
  double score_ = 0;
  bool terminal_ = false;
};

/// Independent tabular Sarsa used for bit-exactness checks. Mirrors the
/// published update equations directly on a Q-table.
class TabularSarsa {
 public:
  TabularSarsa(int states, int actions, SarsaConfig cfg, std::uint64_t seed)
      : actions_(actions), cfg_(cfg), rng_(seed),
        q_(states, std::vector<double>(actions, 0.0)) {}

  int select(int s) {
    if (rng_.uniform() < cfg_.epsilon) return rng_.uniform_int(actions_);
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < actions_; ++a) best = std::max(best, q_[s][a]);
    int ties = 0;
    for (int a = 0; a < actions_; ++a) {
      if (q_[s][a] == best) ++ties;
    }
    int pick = ties > 1 ? rng_.uniform_int(ties) : 0;
    for (int a = 0; a < actions_; ++a) {
      if (q_[s][a] == best && pick-- == 0) return a;
    }
    return actions_ - 1;
  }

  void episode(Environment& env) {
    Observation obs = env.reset();
    int s = obs.payload[0];
    int a = select(s);
    while (true) {
      const StepResult r = env.step(a);
      if (r.terminal) {
        const double delta = r.reward + cfg_.gamma * 0.0 - q_[s][a];
        q_[s][a] += cfg_.alpha * delta * 1.0;
        break;
      }
      const int s2 = r.observation.payload[0];
      const int a2 = select(s2);
      const double delta = r.reward + cfg_.gamma * q_[s2][a2] - q_[s][a];
      q_[s][a] += cfg_.alpha * delta * 1.0;
      s = s2;
      a = a2;
    }
  }

  const std::vector<std::vector<double>>& table() const { return q_; }

 private:
  int actions_;
  SarsaConfig cfg_;
  Rng rng_;
  std::vector<std::vector<double>> q_;
};

}  // namespace deskrl::testing
