#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "deskrl/brute.hpp"
#include "deskrl/env.hpp"
#include "deskrl/protocol.hpp"
#include "deskrl/stats.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace deskrl;
using namespace deskrl::testing;

namespace {

Digest128 key_of(const HistoryPath& prefix) {
  Digest128 key = empty_history_key();
  for (const auto& [a, digest, terminal] : prefix) {
    (void)terminal;
    key = combine(key, a, digest);
  }
  return key;
}

// Plays one episode with uniformly random actions, returning the transcript.
EpisodeTranscript random_episode(Environment& env, Rng& rng) {
  env.reset();
  EpisodeTranscript tr;
  while (!env.is_terminal()) {
    const int a = rng.uniform_int(env.action_count());
    const StepResult r = env.step(a);
    tr.steps.push_back({a, observation_digest(r.observation, r.terminal), r.reward,
                        r.terminal});
  }
  return tr;
}

// A fixed two-step deterministic episode: rewards 1 then 2, gamma 1.
EpisodeTranscript two_step_episode() {
  EpisodeTranscript tr;
  tr.steps.push_back({0, 111, 1.0, false});
  tr.steps.push_back({1, 222, 2.0, true});
  return tr;
}

}  // namespace

TEST_CASE("epsilon schedule: value, monotonicity, cap") {
  HistoryTree tree(3, {1.0, 0.005, 2.0});
  // Appendix-B-style constants at n = 0
  CHECK(tree.epsilon_for(0) == doctest::Approx(0.00721347520).epsilon(1e-6));
  double prev = 1.0;
  for (std::int64_t n = 0; n < 100000; n = n * 2 + 1) {
    const double eps = tree.epsilon_for(n);
    CHECK(eps <= prev);
    CHECK(eps <= 1.0);
    prev = eps;
  }
  // the (0.05, offset 1) variant hits the log(1) = 0 singularity: capped at 1
  HistoryTree legacy(3, {1.0, 0.05, 1.0});
  CHECK(legacy.epsilon_for(0) == 1.0);
}

TEST_CASE("select_action: all-unknown node explores uniformly") {
  HistoryTree tree(4, {});
  Rng rng(5);
  std::vector<std::size_t> counts(4, 0);
  for (int i = 0; i < 20000; ++i) {
    ++counts.at(static_cast<std::size_t>(tree.select_action(tree.root_key(), 0, rng)));
  }
  CHECK(chi_square_uniform_p(counts) > 0.01);
}

TEST_CASE("select_action: ties at the top broken uniformly at random") {
  // Build q = (5, -inf, 5) at the root: two episodes, both ending terminal.
  // A zero exploration numerator forces the greedy branch.
  HistoryTree tree(3, {1.0, 0.0, 2.0});
  EpisodeTranscript a, c;
  a.steps.push_back({0, 1, 5.0, true});
  c.steps.push_back({2, 2, 5.0, true});
  tree.update(a);
  tree.update(c);
  CHECK(tree.value(tree.root_key(), 0) == 5.0);
  CHECK(tree.value(tree.root_key(), 1) == kUnknownValue);
  CHECK(tree.value(tree.root_key(), 2) == 5.0);
  Rng rng(6);
  std::vector<std::size_t> counts(2, 0);
  for (int i = 0; i < 20000; ++i) {
    const int pick = tree.select_action(tree.root_key(), 0, rng);
    REQUIRE(pick != 1);
    ++counts.at(pick == 0 ? 0 : 1);
  }
  CHECK(chi_square_uniform_p(counts) > 0.01);
}

TEST_CASE("update: hand-checked two-step episode, replay idempotence") {
  HistoryTree tree(3, {});
  const EpisodeTranscript tr = two_step_episode();
  tree.update(tr);
  const Digest128 h1 = combine(tree.root_key(), 0, 111);
  CHECK(tree.value(tree.root_key(), 0) == 3.0);
  CHECK(tree.value(h1, 1) == 2.0);
  CHECK(tree.find(tree.root_key())->visits == 1);

  tree.update(tr);
  CHECK(tree.value(tree.root_key(), 0) == 3.0);  // values unchanged
  CHECK(tree.value(h1, 1) == 2.0);
  CHECK(tree.find(tree.root_key())->visits == 2);  // tallies doubled
  CHECK(tree.find(tree.root_key())->actions[0].count == 2);
}

TEST_CASE("update: maximum-likelihood mixture over stochastic successors") {
  HistoryTree tree(2, {});
  // One path reaches a successor whose best action is worth 10, three
  // reach one worth 0; the first transition pays nothing.
  EpisodeTranscript lucky;
  lucky.steps.push_back({0, 71, 0.0, false});
  lucky.steps.push_back({0, 72, 10.0, true});
  tree.update(lucky);
  EpisodeTranscript dud;
  dud.steps.push_back({0, 91, 0.0, false});
  dud.steps.push_back({0, 92, 0.0, true});
  for (int i = 0; i < 3; ++i) tree.update(dud);
  CHECK(tree.value(tree.root_key(), 0) == 2.5);  // 0.25*10 + 0.75*0
}

TEST_CASE("value: fresh tree, bounds check") {
  HistoryTree tree(3, {});
  CHECK(tree.value(tree.root_key(), 0) == kUnknownValue);
  CHECK(tree.value(Digest128{1, 2}, 2) == kUnknownValue);
  CHECK_THROWS_AS(tree.value(tree.root_key(), 3), std::invalid_argument);
  CHECK_THROWS_AS(tree.value(tree.root_key(), -1), std::invalid_argument);
}

TEST_CASE("update rejects an empty transcript and foreign actions") {
  HistoryTree tree(2, {});
  CHECK_THROWS_AS(tree.update(EpisodeTranscript{}), std::invalid_argument);
  EpisodeTranscript bad;
  bad.steps.push_back({7, 1, 0.0, true});
  CHECK_THROWS_AS(tree.update(bad), std::invalid_argument);
}

TEST_CASE("oracle equivalence on random episode sets") {
  // Tree values after every episode must equal a from-scratch bottom-up DP
  // over the same paths. chain_walk truncated to depth 8, gamma = 1.
  Rng rng(2025);
  for (int set = 0; set < 200; ++set) {
    auto env = make_env({"chain_walk", 1, 1}, 8);
    HistoryTree tree(3, {1.0, 0.005, 2.0});
    OracleHistoryDp oracle(3, 1.0);
    const int episodes = 1 + rng.uniform_int(5);
    for (int e = 0; e < episodes; ++e) {
      const EpisodeTranscript tr = random_episode(*env, rng);
      tree.update(tr);
      oracle.add_episode(tr);
      for (const auto& [prefix, action] : oracle.known_pairs()) {
        REQUIRE(tree.value(key_of(prefix), action) == oracle.value(prefix, action));
      }
    }
  }
}

TEST_CASE("lower bound: stored values never exceed the true optimum") {
  Rng rng(99);
  auto env = make_env({"chain_walk", 1, 1}, 8);
  HistoryTree tree(3, {1.0, 0.005, 2.0});
  OracleHistoryDp mirror(3, 1.0);
  for (int e = 0; e < 60; ++e) {
    const EpisodeTranscript tr = random_episode(*env, rng);
    tree.update(tr);
    mirror.add_episode(tr);
  }
  // replay each known prefix through the environment and compare against
  // the exhaustive-search return-to-go
  for (const auto& [prefix, action] : mirror.known_pairs()) {
    env->reset();
    for (const auto& [a, digest, terminal] : prefix) {
      (void)digest;
      (void)terminal;
      env->step(a);
    }
    const StepResult r = env->step(action);
    const double to_go = r.terminal ? 0.0 : optimal_return_to_go(*env);
    const double q_star = r.reward + to_go;
    CHECK(tree.value(key_of(prefix), action) <= q_star + 1e-12);
  }
}

TEST_CASE("complete shallow tree reaches the optimum exactly") {
  // Feed every depth-3 action sequence; the tree is then fully known and
  // its root values equal the exhaustive optimum.
  auto env = make_env({"chain_walk", 1, 1}, 3);
  HistoryTree tree(3, {1.0, 0.005, 2.0});
  for (int a0 = 0; a0 < 3; ++a0) {
    for (int a1 = 0; a1 < 3; ++a1) {
      for (int a2 = 0; a2 < 3; ++a2) {
        env->reset();
        EpisodeTranscript tr;
        for (int a : {a0, a1, a2}) {
          if (env->is_terminal()) break;
          const StepResult r = env->step(a);
          tr.steps.push_back({a, observation_digest(r.observation, r.terminal),
                              r.reward, r.terminal});
        }
        tree.update(tr);
      }
    }
  }
  double root_best = kUnknownValue;
  for (int a = 0; a < 3; ++a) root_best = std::max(root_best, tree.value(tree.root_key(), a));
  CHECK(root_best == optimal_return(*env));
}

TEST_CASE("path locality: an update touches only on-path values") {
  Rng rng(500);
  auto env = make_env({"chain_walk", 1, 1}, 8);
  HistoryTree tree(3, {1.0, 0.005, 2.0});
  OracleHistoryDp mirror(3, 1.0);
  for (int e = 0; e < 30; ++e) {
    const EpisodeTranscript tr = random_episode(*env, rng);
    tree.update(tr);
    mirror.add_episode(tr);
  }
  // snapshot all known values
  std::vector<std::tuple<HistoryPath, int, double>> before;
  for (const auto& [prefix, action] : mirror.known_pairs()) {
    before.emplace_back(prefix, action, tree.value(key_of(prefix), action));
  }
  const EpisodeTranscript tr = random_episode(*env, rng);
  tree.update(tr);
  // pairs on the new episode's path
  std::set<std::pair<HistoryPath, int>> on_path;
  HistoryPath prefix;
  for (const auto& s : tr.steps) {
    on_path.insert({prefix, s.action});
    prefix.emplace_back(s.action, s.obs_digest, s.terminal);
  }
  for (const auto& [p, a, old_value] : before) {
    if (on_path.count({p, a})) continue;
    CHECK(tree.value(key_of(p), a) == old_value);
  }
}

TEST_CASE("episode loop learns chain_walk to the optimum") {
  auto env = make_env({"chain_walk", 1, 1}, 400);
  BruteAgent agent(3, {1.0, 0.005, 2.0}, 31);
  std::int64_t frames = 0;
  int episodes = 0;
  while (frames < 5000) {
    const EpisodeStats s = agent.play_episode(*env);
    frames += s.frames;
    ++episodes;
  }
  CHECK(episodes >= 2);
  auto fresh = make_env({"chain_walk", 1, 1}, 400);
  CHECK(agent.greedy_return(*fresh) == 1.0);
  const auto diag = agent.diagnostics();
  CHECK(diag.at("tree_nodes") > 0);
  CHECK(diag.at("tree_max_depth") > 0);
}

TEST_CASE("budget smaller than one episode still records one episode") {
  auto env = make_env({"crossing", 1, 1}, 50);
  BruteAgent agent(3, {}, 3);
  TrialRecord rec = run_trial(agent, *env, 10, {}, "brute", "crossing:1:1", 0, 3);
  CHECK(rec.episodes.size() == 1);
  CHECK(rec.episodes[0].frames == 50);  // the in-progress episode completes
}

TEST_CASE("key_door stays unsolved on a tiny budget") {
  // No action sequence of 8 steps or fewer scores anything (the shortest
  // key-then-door path needs 9), so a tiny budget yields all-zero returns.
  auto probe = make_env({"key_door", 1, 1}, 8);
  CHECK(optimal_return(*probe) == 0.0);

  auto env = make_env({"key_door", 1, 1}, 8);
  BruteAgent agent(3, {}, 17);
  std::int64_t frames = 0;
  while (frames < 300) {
    const EpisodeStats s = agent.play_episode(*env);
    CHECK(s.score == 0.0);
    frames += s.frames;
  }
  CHECK(agent.tree().node_count() > 1);
}
