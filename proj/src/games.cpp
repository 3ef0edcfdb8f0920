#include "deskrl/env.hpp"

#include <algorithm>
#include <stdexcept>

namespace deskrl {

GameSpec parse_game_spec(const std::string& text) {
  auto p1 = text.find(':');
  auto p2 = text.find(':', p1 == std::string::npos ? p1 : p1 + 1);
  if (p1 == std::string::npos || p2 == std::string::npos) {
    throw std::invalid_argument("game spec must be name:mode:difficulty, got '" +
                                text + "'");
  }
  GameSpec spec;
  spec.name = text.substr(0, p1);
  try {
    spec.mode = std::stoi(text.substr(p1 + 1, p2 - p1 - 1));
    spec.difficulty = std::stoi(text.substr(p2 + 1));
  } catch (const std::exception&) {
    throw std::invalid_argument("bad mode/difficulty in game spec '" + text + "'");
  }
  return spec;
}

namespace {

/// Common bookkeeping: frame counter, raw score, terminal latch, and
/// snapshot plumbing. Subclasses implement the actual dynamics.
class GameBase : public Environment {
 public:
  GameBase(GameSpec spec, std::int64_t cap, int actions, int obs_size)
      : spec_(std::move(spec)), cap_(cap), actions_(actions), obs_size_(obs_size) {
    if (cap_ < 1) throw std::invalid_argument("max_episode_frames must be >= 1");
  }

  int action_count() const override { return actions_; }
  int observation_size() const override { return obs_size_; }
  std::int64_t max_episode_frames() const override { return cap_; }
  const GameSpec& spec() const override { return spec_; }
  std::string state_tag() const override {
    return spec_.to_string() + "#" + std::to_string(cap_);
  }
  std::int64_t episode_frames() const override { return frames_; }
  double episode_score() const override { return static_cast<double>(score_); }
  bool is_terminal() const override { return terminal_; }

  Observation reset() override {
    frames_ = 0;
    score_ = 0;
    terminal_ = false;
    reset_game();
    return observe(0);
  }

  StepResult step(ActionId action) override {
    if (terminal_) throw std::logic_error("step() called on terminal episode");
    if (action < 0 || action >= actions_) {
      throw std::invalid_argument("action " + std::to_string(action) +
                                  " out of range [0, " + std::to_string(actions_) + ")");
    }
    ++frames_;
    bool game_over = false;
    const std::int64_t reward = apply(action, game_over);
    score_ += reward;
    terminal_ = game_over || frames_ >= cap_;
    StepResult r;
    r.observation = observe(reward);
    r.reward = static_cast<double>(reward);
    r.terminal = terminal_;
    r.frames_consumed = 1;
    return r;
  }

  EnvState save_state() const override {
    EnvState s;
    s.tag = state_tag();
    s.words = {frames_, score_, terminal_ ? 1 : 0};
    save_game(s.words);
    return s;
  }

  void restore_state(const EnvState& s) override {
    if (s.tag != state_tag()) {
      throw std::invalid_argument("snapshot tag '" + s.tag +
                                  "' does not match environment '" + state_tag() + "'");
    }
    frames_ = s.words.at(0);
    score_ = s.words.at(1);
    terminal_ = s.words.at(2) != 0;
    std::size_t i = 3;
    restore_game(s.words, i);
  }

 protected:
  virtual void reset_game() = 0;
  virtual std::int64_t apply(ActionId action, bool& game_over) = 0;
  virtual Observation observe(std::int64_t reward) const = 0;
  virtual void save_game(std::vector<std::int64_t>& w) const = 0;
  virtual void restore_game(const std::vector<std::int64_t>& w, std::size_t& i) = 0;

  GameSpec spec_;
  std::int64_t cap_;
  int actions_;
  int obs_size_;
  std::int64_t frames_ = 0;
  std::int64_t score_ = 0;
  bool terminal_ = true;
};

// ---------------------------------------------------------------------------
// chain_walk: a 1-D line. Actions {NOOP, LEFT, RIGHT}; +1 and terminal at the
// far end. Mode 1: 8 cells. Mode 2: 16 cells with a -1 cell at the midpoint.
// Difficulty 2 swaps LEFT and RIGHT.
// ---------------------------------------------------------------------------
class ChainWalk final : public GameBase {
 public:
  ChainWalk(GameSpec spec, std::int64_t cap)
      : GameBase(std::move(spec), cap, /*actions=*/3, /*obs_size=*/1),
        length_(spec_.mode == 1 ? 8 : 16),
        penalty_cell_(spec_.mode == 2 ? 8 : -1),
        swapped_(spec_.difficulty == 2) {}

 private:
  void reset_game() override { pos_ = 0; }

  std::int64_t apply(ActionId action, bool& game_over) override {
    int delta = 0;
    if (action == 1) delta = swapped_ ? +1 : -1;
    if (action == 2) delta = swapped_ ? -1 : +1;
    const int next = std::clamp(pos_ + delta, 0, length_ - 1);
    std::int64_t reward = 0;
    if (next != pos_ && next == penalty_cell_) reward -= 1;
    pos_ = next;
    if (pos_ == length_ - 1) {
      reward += 1;
      game_over = true;
    }
    return reward;
  }

  Observation observe(std::int64_t reward) const override {
    Observation o;
    o.payload = {pos_};
    o.score_delta = static_cast<double>(reward);
    return o;
  }

  void save_game(std::vector<std::int64_t>& w) const override { w.push_back(pos_); }
  void restore_game(const std::vector<std::int64_t>& w, std::size_t& i) override {
    pos_ = static_cast<int>(w.at(i++));
  }

  int length_;
  int penalty_cell_;
  bool swapped_;
  std::int32_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// cliff_corridor: a ledge walked left to right. Interior cells are gated:
// entering at the wrong phase bounces the avatar back (no harm), so progress
// needs timed waits. Stepping DOWN falls off the ledge: penalty, one life
// lost, respawn at the start. Mode 2 adds a gap cell whose platform is away
// half the time; entering the open gap is a fall, not a bounce. The goal at
// the far end pays out and ends the episode. Difficulty 2 makes the payout
// +5 and the fall penalty -5.
// ---------------------------------------------------------------------------
class CliffCorridor final : public GameBase {
 public:
  static constexpr int kWidth = 6;
  static constexpr int kHazardPeriod = 3;
  static constexpr int kGapPeriod = 4;

  CliffCorridor(GameSpec spec, std::int64_t cap)
      : GameBase(std::move(spec), cap, /*actions=*/3, /*obs_size=*/2),
        gap_cell_(spec_.mode == 2 ? kWidth / 2 : -1),
        goal_reward_(spec_.difficulty == 2 ? 5 : 10),
        fall_penalty_(spec_.difficulty == 2 ? -5 : -1) {}

 private:
  int phase_mod() const { return spec_.mode == 2 ? kHazardPeriod * kGapPeriod : kHazardPeriod; }

  void reset_game() override {
    pos_ = 0;
    lives_ = 3;
  }

  std::int64_t apply(ActionId action, bool& game_over) override {
    const std::int64_t t = frames_;  // frame index of this step, 1-based
    bool fell = false;
    if (action == 2) {  // DOWN: off the ledge
      fell = true;
    } else if (action == 1) {  // RIGHT
      const int next = std::min<std::int32_t>(pos_ + 1, kWidth - 1);
      if (next != pos_) {
        if (next == gap_cell_ && t % kGapPeriod >= kGapPeriod / 2) {
          fell = true;  // the gap's platform is away
        } else {
          const bool interior = next >= 1 && next <= kWidth - 2;
          const bool gate_closed = interior && (t + next) % kHazardPeriod == 0;
          if (!gate_closed) pos_ = next;  // closed gates bounce, harmlessly
        }
      }
    }
    if (fell) {
      pos_ = 0;
      --lives_;
      if (lives_ == 0) game_over = true;
      return fall_penalty_;
    }
    if (pos_ == kWidth - 1) {
      game_over = true;
      return goal_reward_;
    }
    return 0;
  }

  Observation observe(std::int64_t reward) const override {
    Observation o;
    o.payload = {pos_, static_cast<std::int32_t>(frames_ % phase_mod())};
    o.lives = lives_;
    o.score_delta = static_cast<double>(reward);
    return o;
  }

  void save_game(std::vector<std::int64_t>& w) const override {
    w.push_back(pos_);
    w.push_back(lives_);
  }
  void restore_game(const std::vector<std::int64_t>& w, std::size_t& i) override {
    pos_ = static_cast<int>(w.at(i++));
    lives_ = static_cast<int>(w.at(i++));
  }

  int gap_cell_;
  std::int64_t goal_reward_;
  std::int64_t fall_penalty_;
  std::int32_t pos_ = 0;
  int lives_ = 3;
};

// ---------------------------------------------------------------------------
// crossing: move UP across lanes of periodic hazards; +1 per completed
// crossing, hazard contact sends the avatar back to the bottom (no penalty).
// Episodes run for the full frame budget. Modes set the lane count (3/5),
// difficulties the hazard period (4/2).
// ---------------------------------------------------------------------------
class Crossing final : public GameBase {
 public:
  Crossing(GameSpec spec, std::int64_t cap)
      : GameBase(std::move(spec), cap, /*actions=*/3, /*obs_size=*/2),
        lanes_(spec_.mode == 1 ? 3 : 5),
        period_(spec_.difficulty == 1 ? 4 : 2) {}

 private:
  void reset_game() override { row_ = 0; }

  std::int64_t apply(ActionId action, bool& game_over) override {
    (void)game_over;  // only the frame cap ends a crossing episode
    const std::int64_t t = frames_;
    if (action == 1) row_ = std::min(row_ + 1, lanes_ + 1);
    if (action == 2) row_ = std::max(row_ - 1, 0);
    if (row_ == lanes_ + 1) {
      row_ = 0;
      return 1;
    }
    if (row_ >= 1 && row_ <= lanes_ && ((t - row_) % period_ + period_) % period_ == 0) {
      row_ = 0;  // hazard contact
    }
    return 0;
  }

  Observation observe(std::int64_t reward) const override {
    Observation o;
    o.payload = {row_, static_cast<std::int32_t>(frames_ % period_)};
    o.score_delta = static_cast<double>(reward);
    return o;
  }

  void save_game(std::vector<std::int64_t>& w) const override { w.push_back(row_); }
  void restore_game(const std::vector<std::int64_t>& w, std::size_t& i) override {
    row_ = static_cast<int>(w.at(i++));
  }

  int lanes_;
  int period_;
  std::int32_t row_ = 0;
};

// ---------------------------------------------------------------------------
// key_door: sparse exploration. Start mid-corridor; the key sits at the left
// end, the door at the right end. The door pays +100 only once the key has
// been collected. Modes set the corridor length; difficulty 2 places -1 trap
// cells in front of the door.
// ---------------------------------------------------------------------------
class KeyDoor final : public GameBase {
 public:
  KeyDoor(GameSpec spec, std::int64_t cap)
      : GameBase(std::move(spec), cap, /*actions=*/3, /*obs_size=*/2),
        length_(spec_.mode == 1 ? 7 : 11),
        traps_(spec_.difficulty == 2) {}

 private:
  void reset_game() override {
    pos_ = length_ / 2;
    has_key_ = false;
  }

  std::int64_t apply(ActionId action, bool& game_over) override {
    int delta = 0;
    if (action == 1) delta = -1;
    if (action == 2) delta = +1;
    const int next = std::clamp(pos_ + delta, 0, length_ - 1);
    std::int64_t reward = 0;
    if (next != pos_) {
      if (traps_ && (next == length_ - 2 || next == length_ - 3)) reward -= 1;
      pos_ = next;
      if (pos_ == 0) has_key_ = true;
      if (pos_ == length_ - 1 && has_key_) {
        reward += 100;
        game_over = true;
      }
    }
    return reward;
  }

  Observation observe(std::int64_t reward) const override {
    Observation o;
    o.payload = {pos_, has_key_ ? 1 : 0};
    o.score_delta = static_cast<double>(reward);
    return o;
  }

  void save_game(std::vector<std::int64_t>& w) const override {
    w.push_back(pos_);
    w.push_back(has_key_ ? 1 : 0);
  }
  void restore_game(const std::vector<std::int64_t>& w, std::size_t& i) override {
    pos_ = static_cast<int>(w.at(i++));
    has_key_ = w.at(i++) != 0;
  }

  int length_;
  bool traps_;
  std::int32_t pos_ = 0;
  bool has_key_ = false;
};

const std::vector<std::pair<int, int>> kStandardFlavors = {
    {1, 1}, {1, 2}, {2, 1}, {2, 2}};

}  // namespace

std::vector<std::string> builtin_games() {
  return {"chain_walk", "cliff_corridor", "crossing", "key_door"};
}

std::vector<std::pair<int, int>> advertised_flavors(const std::string& name) {
  const auto games = builtin_games();
  if (std::find(games.begin(), games.end(), name) == games.end()) {
    throw std::invalid_argument("unknown game '" + name + "'");
  }
  return kStandardFlavors;
}

std::unique_ptr<Environment> make_env(const GameSpec& spec,
                                      std::int64_t max_episode_frames) {
  const auto flavors = advertised_flavors(spec.name);
  if (std::find(flavors.begin(), flavors.end(),
                std::make_pair(spec.mode, spec.difficulty)) == flavors.end()) {
    throw std::invalid_argument("flavor " + spec.to_string() + " not advertised");
  }
  std::unique_ptr<GameBase> env;
  if (spec.name == "chain_walk") {
    env = std::make_unique<ChainWalk>(spec, max_episode_frames);
  } else if (spec.name == "cliff_corridor") {
    env = std::make_unique<CliffCorridor>(spec, max_episode_frames);
  } else if (spec.name == "crossing") {
    env = std::make_unique<Crossing>(spec, max_episode_frames);
  } else {
    env = std::make_unique<KeyDoor>(spec, max_episode_frames);
  }
  env->reset();
  return env;
}

}  // namespace deskrl
