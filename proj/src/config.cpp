#include "deskrl/config.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <json.hpp>

#include "deskrl/env.hpp"
#include "deskrl/wrappers.hpp"

namespace deskrl {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (allowed.find(key) == allowed.end()) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

double get_number(const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw ConfigError("'" + key + "' must be a number");
  return obj[key].get<double>();
}

std::int64_t get_int(const json& obj, const std::string& key, std::int64_t fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) throw ConfigError("'" + key + "' must be an integer");
  return obj[key].get<std::int64_t>();
}

bool get_bool(const json& obj, const std::string& key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) throw ConfigError("'" + key + "' must be a boolean");
  return obj[key].get<bool>();
}

std::string get_string(const json& obj, const std::string& key,
                       const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) throw ConfigError("'" + key + "' must be a string");
  return obj[key].get<std::string>();
}

AgentSpec parse_agent(const json& obj, int index) {
  if (!obj.is_object()) throw ConfigError("agents entries must be objects");
  const std::string where = "agents[" + std::to_string(index) + "]";
  if (!obj.contains("type")) throw ConfigError(where + " is missing 'type'");
  AgentSpec spec;
  spec.type = obj["type"].get<std::string>();
  if (spec.type == "brute") {
    reject_unknown_keys(obj, {"type", "gamma", "epsilon_numerator", "epsilon_offset"},
                        where);
    spec.brute.gamma = get_number(obj, "gamma", spec.brute.gamma);
    spec.brute.epsilon_numerator =
        get_number(obj, "epsilon_numerator", spec.brute.epsilon_numerator);
    spec.brute.epsilon_offset =
        get_number(obj, "epsilon_offset", spec.brute.epsilon_offset);
    if (spec.brute.gamma < 0 || spec.brute.gamma > 1) {
      throw ConfigError("brute gamma must be in [0, 1]");
    }
  } else if (spec.type == "sarsa_lambda") {
    reject_unknown_keys(obj,
                        {"type", "alpha", "gamma", "lambda", "epsilon",
                         "trace_threshold", "reset_traces_each_episode"},
                        where);
    spec.sarsa.alpha = get_number(obj, "alpha", spec.sarsa.alpha);
    spec.sarsa.gamma = get_number(obj, "gamma", spec.sarsa.gamma);
    spec.sarsa.lambda = get_number(obj, "lambda", spec.sarsa.lambda);
    spec.sarsa.epsilon = get_number(obj, "epsilon", spec.sarsa.epsilon);
    spec.sarsa.trace_threshold =
        get_number(obj, "trace_threshold", spec.sarsa.trace_threshold);
    spec.sarsa.reset_traces_each_episode =
        get_bool(obj, "reset_traces_each_episode", true);
    if (spec.sarsa.gamma < 0 || spec.sarsa.gamma > 1 || spec.sarsa.lambda < 0 ||
        spec.sarsa.lambda > 1 || spec.sarsa.epsilon < 0 || spec.sarsa.epsilon > 1) {
      throw ConfigError("sarsa gamma/lambda/epsilon must be in [0, 1]");
    }
  } else if (spec.type == "dqn_mini") {
    reject_unknown_keys(
        obj,
        {"type", "hidden", "alpha", "gamma", "eps_start", "eps_end", "anneal_frames",
         "replay_capacity", "warmup_decisions", "batch_size", "update_every",
         "target_sync_every", "optimizer", "obs_scale"},
        where);
    spec.dqn.hidden = static_cast<int>(get_int(obj, "hidden", spec.dqn.hidden));
    spec.dqn.alpha = get_number(obj, "alpha", spec.dqn.alpha);
    spec.dqn.gamma = get_number(obj, "gamma", spec.dqn.gamma);
    spec.dqn.eps_start = get_number(obj, "eps_start", spec.dqn.eps_start);
    spec.dqn.eps_end = get_number(obj, "eps_end", spec.dqn.eps_end);
    spec.dqn.anneal_frames = get_int(obj, "anneal_frames", spec.dqn.anneal_frames);
    spec.dqn.replay_capacity = get_int(obj, "replay_capacity", spec.dqn.replay_capacity);
    spec.dqn.warmup_decisions =
        get_int(obj, "warmup_decisions", spec.dqn.warmup_decisions);
    spec.dqn.batch_size = static_cast<int>(get_int(obj, "batch_size", spec.dqn.batch_size));
    spec.dqn.update_every =
        static_cast<int>(get_int(obj, "update_every", spec.dqn.update_every));
    spec.dqn.target_sync_every =
        get_int(obj, "target_sync_every", spec.dqn.target_sync_every);
    spec.dqn.optimizer = get_string(obj, "optimizer", spec.dqn.optimizer);
    spec.dqn.obs_scale = get_number(obj, "obs_scale", spec.dqn.obs_scale);
    if (spec.dqn.hidden < 1 || spec.dqn.batch_size < 1 || spec.dqn.update_every < 1 ||
        spec.dqn.target_sync_every < 1 || spec.dqn.replay_capacity < 1) {
      throw ConfigError("dqn sizes and cadences must be positive");
    }
    if (spec.dqn.optimizer != "sgd" && spec.dqn.optimizer != "rmsprop") {
      throw ConfigError("dqn optimizer must be 'sgd' or 'rmsprop'");
    }
    if (spec.dqn.eps_start < 0 || spec.dqn.eps_start > 1 || spec.dqn.eps_end < 0 ||
        spec.dqn.eps_end > 1) {
      throw ConfigError("dqn eps_start/eps_end must be in [0, 1]");
    }
  } else {
    throw ConfigError("unknown agent type '" + spec.type + "'");
  }
  return spec;
}

WrapperSpec parse_wrapper(const json& obj, int index) {
  if (!obj.is_object()) throw ConfigError("stochasticity entries must be objects");
  const std::string where = "stochasticity[" + std::to_string(index) + "]";
  if (!obj.contains("type")) throw ConfigError(where + " is missing 'type'");
  WrapperSpec ws;
  ws.type = obj["type"].get<std::string>();
  if (ws.type == "sticky") {
    reject_unknown_keys(obj, {"type", "varsigma", "frame_skip"}, where);
    ws.varsigma = get_number(obj, "varsigma", ws.varsigma);
    ws.frame_skip = static_cast<int>(get_int(obj, "frame_skip", ws.frame_skip));
    if (ws.varsigma < 0 || ws.varsigma > 1) {
      throw ConfigError("varsigma must be in [0, 1]");
    }
    if (ws.frame_skip < 1) throw ConfigError("frame_skip must be >= 1");
  } else if (ws.type == "initial_noops") {
    reject_unknown_keys(obj, {"type", "k_max"}, where);
    ws.k_max = static_cast<int>(get_int(obj, "k_max", ws.k_max));
    if (ws.k_max < 0) throw ConfigError("k_max must be >= 0");
  } else if (ws.type == "action_noise") {
    reject_unknown_keys(obj, {"type", "eps"}, where);
    ws.eps = get_number(obj, "eps", ws.eps);
    if (ws.eps < 0 || ws.eps > 1) throw ConfigError("eps must be in [0, 1]");
  } else if (ws.type == "random_skip") {
    reject_unknown_keys(obj, {"type", "k1", "k2"}, where);
    ws.k1 = static_cast<int>(get_int(obj, "k1", ws.k1));
    ws.k2 = static_cast<int>(get_int(obj, "k2", ws.k2));
    if (ws.k1 < 1 || ws.k2 < ws.k1) throw ConfigError("need 1 <= k1 <= k2");
  } else if (ws.type == "reward") {
    reject_unknown_keys(obj, {"type", "kind"}, where);
    ws.reward_kind = get_string(obj, "kind", ws.reward_kind);
    try {
      parse_reward_kind(ws.reward_kind);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  } else {
    throw ConfigError("unknown wrapper type '" + ws.type + "'");
  }
  return ws;
}

void validate_games(const std::vector<std::string>& games, const std::string& where) {
  for (const auto& g : games) {
    GameSpec spec;
    try {
      spec = parse_game_spec(g);
    } catch (const std::exception& e) {
      throw ConfigError(where + ": " + e.what());
    }
    const auto flavors = [&] {
      try {
        return advertised_flavors(spec.name);
      } catch (const std::exception& e) {
        throw ConfigError(where + ": " + e.what());
      }
    }();
    if (std::find(flavors.begin(), flavors.end(),
                  std::make_pair(spec.mode, spec.difficulty)) == flavors.end()) {
      throw ConfigError(where + ": flavor " + g + " not advertised");
    }
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config root must be an object");
  reject_unknown_keys(doc,
                      {"agents", "games", "stochasticity", "frame_budget", "milestones",
                       "k", "trials_per_cell", "base_seed", "terminate_on_life_loss",
                       "max_episode_frames", "training_games", "test_games",
                       "output_dir", "purpose"},
                      "config");

  ExperimentConfig cfg;
  if (!doc.contains("agents") || !doc["agents"].is_array() || doc["agents"].empty()) {
    throw ConfigError("config needs a non-empty 'agents' array");
  }
  int idx = 0;
  for (const auto& a : doc["agents"]) cfg.agents.push_back(parse_agent(a, idx++));
  // Unique agent ids: the type, or type#N for repeats.
  std::map<std::string, int> seen;
  for (auto& a : cfg.agents) {
    const int n = seen[a.type]++;
    a.id = n == 0 ? a.type : a.type + "#" + std::to_string(n + 1);
  }

  if (!doc.contains("games") || !doc["games"].is_array() || doc["games"].empty()) {
    throw ConfigError("config needs a non-empty 'games' array");
  }
  for (const auto& g : doc["games"]) {
    if (!g.is_string()) throw ConfigError("games entries must be strings");
    cfg.games.push_back(g.get<std::string>());
  }
  validate_games(cfg.games, "games");

  if (doc.contains("stochasticity")) {
    if (!doc["stochasticity"].is_array()) throw ConfigError("'stochasticity' must be an array");
    idx = 0;
    for (const auto& w : doc["stochasticity"]) {
      cfg.stochasticity.push_back(parse_wrapper(w, idx++));
    }
  }

  cfg.frame_budget = get_int(doc, "frame_budget", 0);
  if (cfg.frame_budget < 1) throw ConfigError("'frame_budget' must be a positive integer");

  cfg.max_episode_frames = get_int(doc, "max_episode_frames", cfg.max_episode_frames);
  if (cfg.max_episode_frames < 1) throw ConfigError("'max_episode_frames' must be >= 1");

  if (doc.contains("milestones")) {
    if (!doc["milestones"].is_array()) throw ConfigError("'milestones' must be an array");
    for (const auto& m : doc["milestones"]) {
      if (!m.is_number_integer()) throw ConfigError("milestones must be integers");
      cfg.milestones.push_back(m.get<std::int64_t>());
    }
    if (!std::is_sorted(cfg.milestones.begin(), cfg.milestones.end())) {
      throw ConfigError("milestones must be sorted ascending");
    }
    for (auto m : cfg.milestones) {
      if (m < 1 || m > cfg.frame_budget) {
        throw ConfigError("milestones must lie in [1, frame_budget]");
      }
    }
  } else {
    // Default ladder: 5%, 25%, 50% and 100% of the budget.
    for (const int pct : {5, 25, 50, 100}) {
      const std::int64_t m = std::max<std::int64_t>(1, cfg.frame_budget * pct / 100);
      if (cfg.milestones.empty() || cfg.milestones.back() != m) cfg.milestones.push_back(m);
    }
  }

  cfg.k = static_cast<int>(get_int(doc, "k", cfg.k));
  if (cfg.k < 1) throw ConfigError("'k' must be >= 1");
  cfg.trials_per_cell = static_cast<int>(get_int(doc, "trials_per_cell", 1));
  if (cfg.trials_per_cell < 1) throw ConfigError("'trials_per_cell' must be >= 1");
  if (doc.contains("base_seed")) {
    if (!doc["base_seed"].is_number_integer()) throw ConfigError("'base_seed' must be an integer");
    cfg.base_seed = doc["base_seed"].get<std::uint64_t>();
  }
  cfg.terminate_on_life_loss = get_bool(doc, "terminate_on_life_loss", false);

  for (const char* key : {"training_games", "test_games"}) {
    if (doc.contains(key)) {
      if (!doc[key].is_array()) throw ConfigError(std::string("'") + key + "' must be an array");
      auto& dst = std::string(key) == "training_games" ? cfg.training_games : cfg.test_games;
      for (const auto& g : doc[key]) {
        if (!g.is_string()) throw ConfigError(std::string(key) + " entries must be strings");
        dst.push_back(g.get<std::string>());
      }
      validate_games(dst, key);
    }
  }
  for (const auto& g : cfg.training_games) {
    if (std::find(cfg.test_games.begin(), cfg.test_games.end(), g) != cfg.test_games.end()) {
      throw ConfigError("training_games and test_games overlap on '" + g + "'");
    }
  }

  cfg.output_dir = get_string(doc, "output_dir", cfg.output_dir);
  cfg.purpose = get_string(doc, "purpose", cfg.purpose);
  if (cfg.purpose != "search" && cfg.purpose != "final") {
    throw ConfigError("'purpose' must be 'search' or 'final'");
  }
  return cfg;
}

std::string dump_config(const ExperimentConfig& cfg) {
  json doc;
  json agents = json::array();
  for (const auto& a : cfg.agents) {
    json obj;
    obj["type"] = a.type;
    if (a.type == "brute") {
      obj["gamma"] = a.brute.gamma;
      obj["epsilon_numerator"] = a.brute.epsilon_numerator;
      obj["epsilon_offset"] = a.brute.epsilon_offset;
    } else if (a.type == "sarsa_lambda") {
      obj["alpha"] = a.sarsa.alpha;
      obj["gamma"] = a.sarsa.gamma;
      obj["lambda"] = a.sarsa.lambda;
      obj["epsilon"] = a.sarsa.epsilon;
      obj["trace_threshold"] = a.sarsa.trace_threshold;
      obj["reset_traces_each_episode"] = a.sarsa.reset_traces_each_episode;
    } else {
      obj["hidden"] = a.dqn.hidden;
      obj["alpha"] = a.dqn.alpha;
      obj["gamma"] = a.dqn.gamma;
      obj["eps_start"] = a.dqn.eps_start;
      obj["eps_end"] = a.dqn.eps_end;
      obj["anneal_frames"] = a.dqn.anneal_frames;
      obj["replay_capacity"] = a.dqn.replay_capacity;
      obj["warmup_decisions"] = a.dqn.warmup_decisions;
      obj["batch_size"] = a.dqn.batch_size;
      obj["update_every"] = a.dqn.update_every;
      obj["target_sync_every"] = a.dqn.target_sync_every;
      obj["optimizer"] = a.dqn.optimizer;
      obj["obs_scale"] = a.dqn.obs_scale;
    }
    agents.push_back(obj);
  }
  doc["agents"] = agents;
  doc["games"] = cfg.games;
  json wrappers = json::array();
  for (const auto& w : cfg.stochasticity) {
    json obj;
    obj["type"] = w.type;
    if (w.type == "sticky") {
      obj["varsigma"] = w.varsigma;
      obj["frame_skip"] = w.frame_skip;
    } else if (w.type == "initial_noops") {
      obj["k_max"] = w.k_max;
    } else if (w.type == "action_noise") {
      obj["eps"] = w.eps;
    } else if (w.type == "random_skip") {
      obj["k1"] = w.k1;
      obj["k2"] = w.k2;
    } else {
      obj["kind"] = w.reward_kind;
    }
    wrappers.push_back(obj);
  }
  doc["stochasticity"] = wrappers;
  doc["frame_budget"] = cfg.frame_budget;
  doc["milestones"] = cfg.milestones;
  doc["k"] = cfg.k;
  doc["trials_per_cell"] = cfg.trials_per_cell;
  doc["base_seed"] = cfg.base_seed;
  doc["terminate_on_life_loss"] = cfg.terminate_on_life_loss;
  doc["max_episode_frames"] = cfg.max_episode_frames;
  doc["training_games"] = cfg.training_games;
  doc["test_games"] = cfg.test_games;
  doc["output_dir"] = cfg.output_dir;
  doc["purpose"] = cfg.purpose;
  return doc.dump(2) + "\n";
}

}  // namespace deskrl
