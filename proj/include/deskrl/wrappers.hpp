#pragma once

#include <memory>
#include <string>
#include <vector>

#include "deskrl/env.hpp"
#include "deskrl/rng.hpp"

namespace deskrl {

/// Pure sticky-action rule: the previously executed action wins when the
/// uniform draw falls below the stickiness parameter.
inline ActionId sticky_resolve(ActionId intent, ActionId prev_executed, double u,
                               double varsigma) {
  return u < varsigma ? prev_executed : intent;
}

/// One frame of a sticky step: what the agent asked for, what was executed,
/// and whether the sticky draw fired (the previous action was chosen,
/// whether or not it happened to coincide with the intent).
struct FrameTrace {
  ActionId intent = 0;
  ActionId prev_executed = 0;
  ActionId executed = 0;
  bool repeated = false;
};

/// Forwarding base for environment transformers.
class EnvWrapper : public Environment {
 public:
  explicit EnvWrapper(std::unique_ptr<Environment> inner)
      : inner_(std::move(inner)) {}

  int action_count() const override { return inner_->action_count(); }
  int observation_size() const override { return inner_->observation_size(); }
  std::int64_t max_episode_frames() const override { return inner_->max_episode_frames(); }
  const GameSpec& spec() const override { return inner_->spec(); }
  std::int64_t episode_frames() const override { return inner_->episode_frames(); }
  double episode_score() const override { return inner_->episode_score(); }
  bool is_terminal() const override { return inner_->is_terminal(); }
  Observation reset() override { return inner_->reset(); }

  std::string state_tag() const override { return wrapper_tag() + "|" + inner_->state_tag(); }

  EnvState save_state() const override {
    EnvState s = inner_->save_state();
    s.tag = state_tag();
    save_wrapper(s.words);
    return s;
  }

  void restore_state(const EnvState& s) override {
    if (s.tag != state_tag()) {
      throw std::invalid_argument("snapshot tag '" + s.tag +
                                  "' does not match environment '" + state_tag() + "'");
    }
    EnvState in;
    in.tag = inner_->state_tag();
    in.words = s.words;
    const std::size_t n = wrapper_word_count();
    if (in.words.size() < n) throw std::invalid_argument("truncated snapshot");
    restore_wrapper(std::vector<std::int64_t>(in.words.end() - n, in.words.end()));
    in.words.resize(in.words.size() - n);
    inner_->restore_state(in);
  }

  Environment& inner() { return *inner_; }

 protected:
  virtual std::string wrapper_tag() const = 0;
  virtual std::size_t wrapper_word_count() const = 0;
  virtual void save_wrapper(std::vector<std::int64_t>& w) const = 0;
  virtual void restore_wrapper(const std::vector<std::int64_t>& w) = 0;

  static void save_rng(const Rng& rng, std::vector<std::int64_t>& w) {
    for (auto x : rng.state()) w.push_back(static_cast<std::int64_t>(x));
  }
  static void restore_rng(Rng& rng, const std::vector<std::int64_t>& w, std::size_t at) {
    std::array<std::uint64_t, 4> s;
    for (int i = 0; i < 4; ++i) s[i] = static_cast<std::uint64_t>(w[at + i]);
    rng.set_state(s);
  }

  std::unique_ptr<Environment> inner_;
};

/// Sticky actions with frame skipping: each decision advances frame_skip
/// frames, and at every frame the previously executed action is repeated
/// with probability varsigma. Once the intended action executes, the rest
/// of the window executes it too (previous == intent from then on).
class StickyActions final : public EnvWrapper {
 public:
  StickyActions(std::unique_ptr<Environment> inner, double varsigma, int frame_skip,
                std::uint64_t seed);

  Observation reset() override;
  StepResult step(ActionId intent) override;

  /// Per-frame trace of the most recent step.
  const std::vector<FrameTrace>& last_trace() const { return trace_; }

 protected:
  std::string wrapper_tag() const override;
  std::size_t wrapper_word_count() const override { return 5; }
  void save_wrapper(std::vector<std::int64_t>& w) const override;
  void restore_wrapper(const std::vector<std::int64_t>& w) override;

 private:
  double varsigma_;
  int frame_skip_;
  Rng rng_;
  ActionId prev_executed_ = kNoop;
  std::vector<FrameTrace> trace_;
};

/// Applies a uniformly drawn number of no-ops (0..k_max) after each reset.
/// No-op frames count toward the episode budget.
class InitialNoops final : public EnvWrapper {
 public:
  InitialNoops(std::unique_ptr<Environment> inner, int k_max, std::uint64_t seed);

  Observation reset() override;
  StepResult step(ActionId a) override { return inner_->step(a); }

 protected:
  std::string wrapper_tag() const override;
  std::size_t wrapper_word_count() const override { return 4; }
  void save_wrapper(std::vector<std::int64_t>& w) const override { save_rng(rng_, w); }
  void restore_wrapper(const std::vector<std::int64_t>& w) override {
    restore_rng(rng_, w, 0);
  }

 private:
  int k_max_;
  Rng rng_;
};

/// Replaces the intent with a uniformly random action with probability eps.
class ActionNoise final : public EnvWrapper {
 public:
  ActionNoise(std::unique_ptr<Environment> inner, double eps, std::uint64_t seed);

  StepResult step(ActionId a) override;

  /// Number of steps on which the intent was replaced (the replacement may
  /// coincide with the intent; the draw still counts).
  std::int64_t replacements() const { return replacements_; }

 protected:
  std::string wrapper_tag() const override;
  std::size_t wrapper_word_count() const override { return 4; }
  void save_wrapper(std::vector<std::int64_t>& w) const override { save_rng(rng_, w); }
  void restore_wrapper(const std::vector<std::int64_t>& w) override {
    restore_rng(rng_, w, 0);
  }

 private:
  double eps_;
  Rng rng_;
  std::int64_t replacements_ = 0;
};

/// Repeats each chosen action for a uniformly drawn k in [k1, k2] frames.
/// With k1 == k2 this is a fixed frame skip.
class RandomFrameSkip final : public EnvWrapper {
 public:
  RandomFrameSkip(std::unique_ptr<Environment> inner, int k1, int k2,
                  std::uint64_t seed);

  StepResult step(ActionId a) override;

 protected:
  std::string wrapper_tag() const override;
  std::size_t wrapper_word_count() const override { return 4; }
  void save_wrapper(std::vector<std::int64_t>& w) const override { save_rng(rng_, w); }
  void restore_wrapper(const std::vector<std::int64_t>& w) override {
    restore_rng(rng_, w, 0);
  }

 private:
  int k1_, k2_;
  Rng rng_;
};

enum class RewardKind { kIdentity, kSignClip, kFirstNonzeroScale };

RewardKind parse_reward_kind(const std::string& name);
std::string reward_kind_name(RewardKind kind);

/// Passes rewards through a normalization transform. The untransformed
/// episode score stays queryable through episode_score().
class RewardTransform final : public EnvWrapper {
 public:
  RewardTransform(std::unique_ptr<Environment> inner, RewardKind kind);

  StepResult step(ActionId a) override;

  /// Scale learned by first_nonzero_scale; 0 until a non-zero reward is seen.
  double learned_scale() const { return scale_; }

 protected:
  std::string wrapper_tag() const override;
  std::size_t wrapper_word_count() const override { return 1; }
  void save_wrapper(std::vector<std::int64_t>& w) const override;
  void restore_wrapper(const std::vector<std::int64_t>& w) override;

 private:
  RewardKind kind_;
  double scale_ = 0.0;  // fixed for the wrapper's lifetime once set
};

/// Ends the reported episode when a life is lost. The next reset starts a
/// fresh game. Off by default in the harness; the recommended protocol
/// terminates on game over only.
class LifeLossTermination final : public EnvWrapper {
 public:
  explicit LifeLossTermination(std::unique_ptr<Environment> inner)
      : EnvWrapper(std::move(inner)) {}

  Observation reset() override;
  StepResult step(ActionId a) override;
  bool is_terminal() const override { return latched_ || inner_->is_terminal(); }

 protected:
  std::string wrapper_tag() const override { return "life_loss"; }
  std::size_t wrapper_word_count() const override { return 2; }
  void save_wrapper(std::vector<std::int64_t>& w) const override {
    w.push_back(prev_lives_);
    w.push_back(latched_ ? 1 : 0);
  }
  void restore_wrapper(const std::vector<std::int64_t>& w) override {
    prev_lives_ = static_cast<int>(w[0]);
    latched_ = w[1] != 0;
  }

 private:
  int prev_lives_ = -1;
  bool latched_ = false;
};

}  // namespace deskrl
