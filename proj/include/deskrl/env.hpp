#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace deskrl {

using ActionId = int;

/// Action 0 is the no-op in every built-in game.
inline constexpr ActionId kNoop = 0;

struct Observation {
  std::vector<std::int32_t> payload;  // game-specific integer encoding
  std::optional<int> lives;           // present only in games with a lives counter
  double score_delta = 0.0;           // reward carried by this observation

  friend bool operator==(const Observation& a, const Observation& b) {
    return a.payload == b.payload && a.lives == b.lives &&
           a.score_delta == b.score_delta;
  }
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool terminal = false;
  std::int64_t frames_consumed = 1;

  friend bool operator==(const StepResult& a, const StepResult& b) {
    return a.observation == b.observation && a.reward == b.reward &&
           a.terminal == b.terminal && a.frames_consumed == b.frames_consumed;
  }
};

/// Identifies a game variant. Every built-in game advertises at least
/// two modes and two difficulties.
struct GameSpec {
  std::string name;
  int mode = 1;
  int difficulty = 1;

  std::string to_string() const {
    return name + ":" + std::to_string(mode) + ":" + std::to_string(difficulty);
  }
  friend bool operator==(const GameSpec& a, const GameSpec& b) {
    return a.name == b.name && a.mode == b.mode && a.difficulty == b.difficulty;
  }
};

/// Parses "name:mode:difficulty". Throws std::invalid_argument on bad input.
GameSpec parse_game_spec(const std::string& text);

/// Opaque snapshot of an environment (including any wrapper state).
/// `tag` identifies the producing game + wrapper stack; restoring into a
/// mismatched environment is rejected.
struct EnvState {
  std::string tag;
  std::vector<std::int64_t> words;
};

/// Episodic environment contract. Implementations are single-threaded
/// state machines; instances may be moved between threads but never
/// shared mutably.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual int action_count() const = 0;
  virtual int observation_size() const = 0;
  virtual std::int64_t max_episode_frames() const = 0;
  virtual const GameSpec& spec() const = 0;

  /// Identifier of this environment incl. wrapper stack, used to match
  /// snapshots to compatible environments.
  virtual std::string state_tag() const = 0;

  virtual Observation reset() = 0;
  virtual StepResult step(ActionId action) = 0;

  /// Frames consumed so far in the current episode.
  virtual std::int64_t episode_frames() const = 0;
  /// Raw (untransformed) cumulative reward of the current episode.
  virtual double episode_score() const = 0;
  virtual bool is_terminal() const = 0;

  virtual EnvState save_state() const = 0;
  virtual void restore_state(const EnvState& s) = 0;
};

/// Instantiates a built-in game. Throws std::invalid_argument for an
/// unknown name or a flavor the game does not advertise.
std::unique_ptr<Environment> make_env(const GameSpec& spec,
                                      std::int64_t max_episode_frames = 18000);

/// Advertised (mode, difficulty) pairs for a built-in game.
std::vector<std::pair<int, int>> advertised_flavors(const std::string& name);

/// Names of all built-in games.
std::vector<std::string> builtin_games();

}  // namespace deskrl
