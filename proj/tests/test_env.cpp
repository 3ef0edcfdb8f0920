#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "deskrl/env.hpp"
#include "deskrl/rng.hpp"

using namespace deskrl;

TEST_CASE("parse_game_spec round trip and errors") {
  const GameSpec spec = parse_game_spec("chain_walk:1:2");
  CHECK(spec.name == "chain_walk");
  CHECK(spec.mode == 1);
  CHECK(spec.difficulty == 2);
  CHECK(spec.to_string() == "chain_walk:1:2");
  CHECK_THROWS_AS(parse_game_spec("chain_walk"), std::invalid_argument);
  CHECK_THROWS_AS(parse_game_spec("chain_walk:x:y"), std::invalid_argument);
}

TEST_CASE("make_env validates game and flavor") {
  auto env = make_env({"chain_walk", 1, 1});
  CHECK(env->action_count() == 3);
  CHECK(env->observation_size() == 1);
  CHECK(env->max_episode_frames() == 18000);
  CHECK_THROWS_AS(make_env({"chain_walk", 1, 9}), std::invalid_argument);
  CHECK_THROWS_AS(make_env({"pitfall", 1, 1}), std::invalid_argument);
  auto cliff = make_env({"cliff_corridor", 2, 1});
  CHECK(cliff->reset().lives == 3);
}

TEST_CASE("every built-in game advertises at least 2 modes and 2 difficulties") {
  for (const auto& name : builtin_games()) {
    const auto flavors = advertised_flavors(name);
    int max_mode = 0, max_diff = 0;
    for (auto [m, d] : flavors) {
      max_mode = std::max(max_mode, m);
      max_diff = std::max(max_diff, d);
      CHECK_NOTHROW(make_env({name, m, d}));
    }
    CHECK(max_mode >= 2);
    CHECK(max_diff >= 2);
  }
}

TEST_CASE("reset returns the canonical start") {
  auto env = make_env({"chain_walk", 1, 1});
  const Observation a = env->reset();
  CHECK(a.payload == std::vector<std::int32_t>{0});
  CHECK_FALSE(a.lives.has_value());
  CHECK(a.score_delta == 0.0);
  const Observation b = env->reset();
  CHECK(a == b);
  auto cliff = make_env({"cliff_corridor", 1, 1});
  CHECK(cliff->reset().lives == 3);
}

TEST_CASE("chain_walk reaches the goal at the far end") {
  auto env = make_env({"chain_walk", 1, 1});
  env->reset();
  for (int i = 0; i < 6; ++i) {
    const StepResult r = env->step(2);
    CHECK_FALSE(r.terminal);
    CHECK(r.reward == 0.0);
  }
  // position 6, RIGHT -> position 7 == length-1: +1 and terminal
  const StepResult r = env->step(2);
  CHECK(r.observation.payload[0] == 7);
  CHECK(r.reward == 1.0);
  CHECK(r.terminal);
  CHECK(env->episode_score() == 1.0);
  CHECK_THROWS_AS(env->step(0), std::logic_error);
}

TEST_CASE("invalid action index is rejected") {
  auto env = make_env({"chain_walk", 1, 1});
  env->reset();
  CHECK_THROWS_AS(env->step(3), std::invalid_argument);
  CHECK_THROWS_AS(env->step(-1), std::invalid_argument);
}

TEST_CASE("chain_walk difficulty 2 swaps LEFT and RIGHT") {
  auto env = make_env({"chain_walk", 1, 2});
  env->reset();
  const StepResult r = env->step(1);  // swapped: moves right
  CHECK(r.observation.payload[0] == 1);
  env->reset();
  const StepResult l = env->step(2);  // swapped: moves left, clamped at 0
  CHECK(l.observation.payload[0] == 0);
}

TEST_CASE("chain_walk mode 2 has a penalty cell at the midpoint") {
  auto env = make_env({"chain_walk", 2, 1});
  env->reset();
  double total = 0.0;
  for (int i = 0; i < 8; ++i) total += env->step(2).reward;
  CHECK(total == -1.0);  // crossed cell 8
  // stepping off and back onto the penalty cell charges again
  total += env->step(1).reward;
  total += env->step(2).reward;
  CHECK(total == -2.0);
}

TEST_CASE("cliff_corridor falls on DOWN and ends when lives run out") {
  auto env = make_env({"cliff_corridor", 1, 1});
  Observation obs = env->reset();
  CHECK(obs.lives == 3);
  StepResult r = env->step(2);  // DOWN off the ledge
  CHECK(r.reward == -1.0);
  CHECK(r.observation.lives == 2);
  CHECK_FALSE(r.terminal);
  r = env->step(2);
  CHECK(r.observation.lives == 1);
  CHECK_FALSE(r.terminal);
  r = env->step(2);
  CHECK(r.observation.lives == 0);
  CHECK(r.terminal);
  CHECK(env->episode_score() == -3.0);
}

TEST_CASE("cliff_corridor difficulty 2 changes the payouts") {
  auto env = make_env({"cliff_corridor", 1, 2});
  env->reset();
  CHECK(env->step(2).reward == -5.0);
}

TEST_CASE("cliff_corridor lives never increase within an episode") {
  auto env = make_env({"cliff_corridor", 1, 1}, 500);
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Observation obs = env->reset();
    int lives = *obs.lives;
    while (!env->is_terminal()) {
      const StepResult r = env->step(rng.uniform_int(3));
      CHECK(*r.observation.lives <= lives);
      lives = *r.observation.lives;
    }
  }
}

TEST_CASE("crossing pays one point per completed crossing") {
  auto env = make_env({"crossing", 1, 1}, 100);
  env->reset();
  // wait for a safe phase, then march up
  double total = 0.0;
  total += env->step(0).reward;
  total += env->step(0).reward;
  for (int i = 0; i < 4; ++i) total += env->step(1).reward;
  CHECK(total == 1.0);
}

TEST_CASE("crossing never terminates before the frame cap") {
  auto env = make_env({"crossing", 1, 1}, 60);
  env->reset();
  Rng rng(3);
  std::int64_t frames = 0;
  while (!env->is_terminal()) {
    env->step(rng.uniform_int(3));
    ++frames;
  }
  CHECK(frames == 60);
}

TEST_CASE("key_door pays only with the key collected first") {
  auto env = make_env({"key_door", 1, 1}, 200);
  env->reset();
  // door without key: nothing
  double total = 0.0;
  for (int i = 0; i < 3; ++i) total += env->step(2).reward;
  CHECK(total == 0.0);
  CHECK_FALSE(env->is_terminal());
  env->reset();
  for (int i = 0; i < 3; ++i) env->step(1);  // to the key
  CHECK(env->episode_score() == 0.0);
  StepResult r{};
  for (int i = 0; i < 6; ++i) r = env->step(2);  // to the door
  CHECK(r.reward == 100.0);
  CHECK(r.terminal);
}

TEST_CASE("key_door difficulty 2 charges for the trap corridor") {
  auto env = make_env({"key_door", 1, 2}, 200);
  env->reset();
  for (int i = 0; i < 3; ++i) env->step(1);
  double total = 0.0;
  for (int i = 0; i < 6; ++i) total += env->step(2).reward;
  CHECK(total == 98.0);  // two -1 traps on the way to the +100 door
}

TEST_CASE("determinism: independent environments produce identical trajectories") {
  Rng rng(11);
  for (const auto& name : builtin_games()) {
    for (auto [m, d] : advertised_flavors(name)) {
      auto a = make_env({name, m, d}, 300);
      auto b = make_env({name, m, d}, 300);
      a->reset();
      b->reset();
      for (int i = 0; i < 300 && !a->is_terminal(); ++i) {
        const int action = rng.uniform_int(a->action_count());
        const StepResult ra = a->step(action);
        const StepResult rb = b->step(action);
        CHECK(ra == rb);
      }
    }
  }
}

TEST_CASE("episode boundedness: every episode ends within the frame cap") {
  Rng rng(13);
  for (const auto& name : builtin_games()) {
    auto env = make_env({name, 1, 1}, 120);
    for (int trial = 0; trial < 5; ++trial) {
      env->reset();
      std::int64_t frames = 0;
      while (!env->is_terminal()) {
        env->step(rng.uniform_int(env->action_count()));
        ++frames;
        REQUIRE(frames <= 120);
      }
    }
  }
}

namespace {

double sequence_score(const GameSpec& spec, const std::vector<int>& actions,
                      std::int64_t cap) {
  auto env = make_env(spec, cap);
  env->reset();
  double total = 0.0;
  for (int a : actions) {
    total += env->step(a).reward;
    if (env->is_terminal()) break;
  }
  return total;
}

}  // namespace

TEST_CASE("flavor distinctness: a fixed sequence separates flavors") {
  // chain_walk: marching right wins in m1:d1, stalls in d2, pays less in m2.
  const std::vector<int> march_right(16, 2);
  CHECK(sequence_score({"chain_walk", 1, 1}, march_right, 100) !=
        sequence_score({"chain_walk", 1, 2}, march_right, 100));
  CHECK(sequence_score({"chain_walk", 1, 1}, march_right, 100) !=
        sequence_score({"chain_walk", 2, 1}, march_right, 100));

  // cliff_corridor: the mode-2 gap and difficulty-2 payouts separate.
  const std::vector<int> down_once{2};
  CHECK(sequence_score({"cliff_corridor", 1, 1}, down_once, 100) !=
        sequence_score({"cliff_corridor", 1, 2}, down_once, 100));
  // enters the gap cell at a frame where mode 2's platform is away
  std::vector<int> walk{1, 1, 0, 0, 0, 0, 1};
  CHECK(sequence_score({"cliff_corridor", 1, 1}, walk, 100) !=
        sequence_score({"cliff_corridor", 2, 1}, walk, 100));

  // crossing: in 6 steps the short map is crossed once, the tall map is
  // not, and the period-2 hazard bounces this particular march.
  const std::vector<int> cross{0, 0, 1, 1, 1, 1};
  CHECK(sequence_score({"crossing", 1, 1}, cross, 100) !=
        sequence_score({"crossing", 2, 1}, cross, 100));
  CHECK(sequence_score({"crossing", 1, 1}, cross, 100) !=
        sequence_score({"crossing", 1, 2}, cross, 100));

  // key_door: map size and traps separate.
  std::vector<int> fetch;
  for (int i = 0; i < 5; ++i) fetch.push_back(1);
  for (int i = 0; i < 7; ++i) fetch.push_back(2);
  CHECK(sequence_score({"key_door", 1, 1}, fetch, 100) !=
        sequence_score({"key_door", 2, 1}, fetch, 100));
  CHECK(sequence_score({"key_door", 1, 1}, fetch, 100) !=
        sequence_score({"key_door", 1, 2}, fetch, 100));
}

TEST_CASE("save/restore: identity, flavor mismatch, frame counter") {
  auto env = make_env({"chain_walk", 1, 1});
  env->reset();
  env->step(2);
  const EnvState s = env->save_state();
  const StepResult direct = env->step(2);
  env->restore_state(s);
  const StepResult replayed = env->step(2);
  CHECK(direct == replayed);

  auto other = make_env({"crossing", 1, 1});
  CHECK_THROWS_AS(other->restore_state(s), std::invalid_argument);

  auto env2 = make_env({"crossing", 1, 1});
  env2->reset();
  for (int i = 0; i < 40; ++i) env2->step(0);
  const EnvState s40 = env2->save_state();
  env2->step(0);
  env2->restore_state(s40);
  CHECK(env2->episode_frames() == 40);
}

TEST_CASE("save/restore round-trip equivalence on random trajectories") {
  Rng rng(2024);
  const auto games = builtin_games();
  int checked = 0;
  while (checked < 1000) {
    const auto& name = games[rng.uniform_int(static_cast<int>(games.size()))];
    const auto flavors = advertised_flavors(name);
    const auto [m, d] = flavors[rng.uniform_int(static_cast<int>(flavors.size()))];
    auto env = make_env({name, m, d}, 120);
    env->reset();
    const int cut = rng.uniform_int(40);
    for (int i = 0; i < cut && !env->is_terminal(); ++i) {
      env->step(rng.uniform_int(env->action_count()));
    }
    if (env->is_terminal()) continue;
    const EnvState snap = env->save_state();
    const int action = rng.uniform_int(env->action_count());
    const StepResult direct = env->step(action);
    env->restore_state(snap);
    const StepResult replayed = env->step(action);
    CHECK(direct == replayed);
    ++checked;
  }
}
