#include "deskrl/wrappers.hpp"

#include <cstring>
#include <stdexcept>

namespace deskrl {

namespace {
std::int64_t double_bits(double d) {
  std::int64_t out;
  std::memcpy(&out, &d, sizeof(out));
  return out;
}
double bits_double(std::int64_t w) {
  double out;
  std::memcpy(&out, &w, sizeof(out));
  return out;
}
std::string fmt(double v) {
  std::string s = std::to_string(v);
  return s;
}
}  // namespace

// ---------------------------------------------------------------------------
// StickyActions
// ---------------------------------------------------------------------------

StickyActions::StickyActions(std::unique_ptr<Environment> inner, double varsigma,
                             int frame_skip, std::uint64_t seed)
    : EnvWrapper(std::move(inner)), varsigma_(varsigma), frame_skip_(frame_skip),
      rng_(seed) {
  if (varsigma_ < 0.0 || varsigma_ > 1.0) {
    throw std::invalid_argument("varsigma must be in [0, 1]");
  }
  if (frame_skip_ < 1) throw std::invalid_argument("frame_skip must be >= 1");
}

std::string StickyActions::wrapper_tag() const {
  return "sticky(" + fmt(varsigma_) + "," + std::to_string(frame_skip_) + ")";
}

Observation StickyActions::reset() {
  prev_executed_ = kNoop;
  trace_.clear();
  return inner_->reset();
}

StepResult StickyActions::step(ActionId intent) {
  trace_.clear();
  StepResult out;
  double reward = 0.0;
  std::int64_t frames = 0;
  for (int f = 0; f < frame_skip_; ++f) {
    const double u = rng_.uniform();
    const bool repeated = u < varsigma_;
    const ActionId executed = sticky_resolve(intent, prev_executed_, u, varsigma_);
    trace_.push_back({intent, prev_executed_, executed, repeated});
    prev_executed_ = executed;
    StepResult r = inner_->step(executed);
    reward += r.reward;
    frames += r.frames_consumed;
    out.observation = std::move(r.observation);
    out.terminal = r.terminal;
    if (r.terminal) break;
  }
  out.reward = reward;
  out.observation.score_delta = reward;
  out.frames_consumed = frames;
  return out;
}

void StickyActions::save_wrapper(std::vector<std::int64_t>& w) const {
  save_rng(rng_, w);
  w.push_back(prev_executed_);
}

void StickyActions::restore_wrapper(const std::vector<std::int64_t>& w) {
  restore_rng(rng_, w, 0);
  prev_executed_ = static_cast<ActionId>(w[4]);
}

// ---------------------------------------------------------------------------
// InitialNoops
// ---------------------------------------------------------------------------

InitialNoops::InitialNoops(std::unique_ptr<Environment> inner, int k_max,
                           std::uint64_t seed)
    : EnvWrapper(std::move(inner)), k_max_(k_max), rng_(seed) {
  if (k_max_ < 0) throw std::invalid_argument("k_max must be >= 0");
}

std::string InitialNoops::wrapper_tag() const {
  return "initial_noops(" + std::to_string(k_max_) + ")";
}

Observation InitialNoops::reset() {
  for (int attempt = 0; attempt < 2; ++attempt) {
    Observation obs = inner_->reset();
    const int m = k_max_ == 0 ? 0 : rng_.uniform_int(k_max_ + 1);
    bool died = false;
    for (int j = 0; j < m; ++j) {
      StepResult r = inner_->step(kNoop);
      obs = std::move(r.observation);
      if (r.terminal) {
        died = true;
        break;
      }
    }
    if (!died) return obs;
  }
  throw std::runtime_error("episode ended during initial no-ops twice; "
                           "game too short for k_max=" + std::to_string(k_max_));
}

// ---------------------------------------------------------------------------
// ActionNoise
// ---------------------------------------------------------------------------

ActionNoise::ActionNoise(std::unique_ptr<Environment> inner, double eps,
                         std::uint64_t seed)
    : EnvWrapper(std::move(inner)), eps_(eps), rng_(seed) {
  if (eps_ < 0.0 || eps_ > 1.0) throw std::invalid_argument("eps must be in [0, 1]");
}

std::string ActionNoise::wrapper_tag() const { return "action_noise(" + fmt(eps_) + ")"; }

StepResult ActionNoise::step(ActionId a) {
  if (eps_ > 0.0 && rng_.uniform() < eps_) {
    a = rng_.uniform_int(inner_->action_count());
    ++replacements_;
  }
  return inner_->step(a);
}

// ---------------------------------------------------------------------------
// RandomFrameSkip
// ---------------------------------------------------------------------------

RandomFrameSkip::RandomFrameSkip(std::unique_ptr<Environment> inner, int k1, int k2,
                                 std::uint64_t seed)
    : EnvWrapper(std::move(inner)), k1_(k1), k2_(k2), rng_(seed) {
  if (k1_ < 1 || k2_ < k1_) throw std::invalid_argument("need 1 <= k1 <= k2");
}

std::string RandomFrameSkip::wrapper_tag() const {
  return "random_skip(" + std::to_string(k1_) + "," + std::to_string(k2_) + ")";
}

StepResult RandomFrameSkip::step(ActionId a) {
  const int k = k1_ == k2_ ? k1_ : k1_ + rng_.uniform_int(k2_ - k1_ + 1);
  StepResult out;
  double reward = 0.0;
  std::int64_t frames = 0;
  for (int f = 0; f < k; ++f) {
    StepResult r = inner_->step(a);
    reward += r.reward;
    frames += r.frames_consumed;
    out.observation = std::move(r.observation);
    out.terminal = r.terminal;
    if (r.terminal) break;
  }
  out.reward = reward;
  out.observation.score_delta = reward;
  out.frames_consumed = frames;
  return out;
}

// ---------------------------------------------------------------------------
// RewardTransform
// ---------------------------------------------------------------------------

RewardKind parse_reward_kind(const std::string& name) {
  if (name == "identity") return RewardKind::kIdentity;
  if (name == "sign_clip") return RewardKind::kSignClip;
  if (name == "first_nonzero_scale") return RewardKind::kFirstNonzeroScale;
  throw std::invalid_argument("unknown reward transform '" + name + "'");
}

std::string reward_kind_name(RewardKind kind) {
  switch (kind) {
    case RewardKind::kIdentity: return "identity";
    case RewardKind::kSignClip: return "sign_clip";
    case RewardKind::kFirstNonzeroScale: return "first_nonzero_scale";
  }
  return "?";
}

RewardTransform::RewardTransform(std::unique_ptr<Environment> inner, RewardKind kind)
    : EnvWrapper(std::move(inner)), kind_(kind) {}

std::string RewardTransform::wrapper_tag() const {
  return "reward(" + reward_kind_name(kind_) + ")";
}

StepResult RewardTransform::step(ActionId a) {
  StepResult r = inner_->step(a);
  switch (kind_) {
    case RewardKind::kIdentity:
      break;
    case RewardKind::kSignClip:
      r.reward = r.reward > 0 ? 1.0 : (r.reward < 0 ? -1.0 : 0.0);
      break;
    case RewardKind::kFirstNonzeroScale:
      if (scale_ == 0.0 && r.reward != 0.0) scale_ = std::abs(r.reward);
      if (scale_ != 0.0) r.reward /= scale_;
      break;
  }
  r.observation.score_delta = r.reward;
  return r;
}

void RewardTransform::save_wrapper(std::vector<std::int64_t>& w) const {
  w.push_back(double_bits(scale_));
}

void RewardTransform::restore_wrapper(const std::vector<std::int64_t>& w) {
  scale_ = bits_double(w[0]);
}

// ---------------------------------------------------------------------------
// LifeLossTermination
// ---------------------------------------------------------------------------

Observation LifeLossTermination::reset() {
  latched_ = false;
  Observation obs = inner_->reset();
  prev_lives_ = obs.lives.value_or(-1);
  return obs;
}

StepResult LifeLossTermination::step(ActionId a) {
  if (latched_) throw std::logic_error("step() called on terminal episode");
  StepResult r = inner_->step(a);
  if (r.observation.lives && prev_lives_ >= 0 && *r.observation.lives < prev_lives_) {
    r.terminal = true;
    latched_ = true;
  }
  prev_lives_ = r.observation.lives.value_or(prev_lives_);
  return r;
}

}  // namespace deskrl
