#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deskrl/brute.hpp"
#include "deskrl/dqn.hpp"
#include "deskrl/sarsa.hpp"

namespace deskrl {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One entry of the stochasticity wrapper stack. The first entry in the
/// config list is applied closest to the environment.
struct WrapperSpec {
  std::string type;  // sticky | initial_noops | action_noise | random_skip | reward
  double varsigma = 0.25;
  int frame_skip = 5;
  int k_max = 30;
  double eps = 0.1;
  int k1 = 2, k2 = 4;
  std::string reward_kind = "sign_clip";
};

struct AgentSpec {
  std::string type;  // brute | sarsa_lambda | dqn_mini
  std::string id;    // unique within the experiment (type, or type#N)
  BruteConfig brute;
  SarsaConfig sarsa;
  DqnConfig dqn;
};

struct ExperimentConfig {
  std::vector<AgentSpec> agents;
  std::vector<std::string> games;  // "name:mode:difficulty"
  std::vector<WrapperSpec> stochasticity;
  std::int64_t frame_budget = 0;
  std::vector<std::int64_t> milestones;  // defaults to 5/25/50/100% of budget
  int k = 100;
  int trials_per_cell = 1;
  std::uint64_t base_seed = 0;
  bool terminate_on_life_loss = false;
  std::int64_t max_episode_frames = 18000;
  std::vector<std::string> training_games;
  std::vector<std::string> test_games;
  std::string output_dir = "out";
  std::string purpose = "search";  // "search" or "final"
};

/// Parses and fully validates a config document. Unknown keys are
/// rejected, not ignored. Throws ConfigError with a readable message.
ExperimentConfig parse_config(const std::string& json_text);

/// Canonical JSON serialization of a resolved config (defaults filled in).
std::string dump_config(const ExperimentConfig& cfg);

}  // namespace deskrl
