#include "deskrl/runner.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "deskrl/ioutil.hpp"
#include "deskrl/svg.hpp"
#include "deskrl/wrappers.hpp"

namespace deskrl {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t trial_seed(std::uint64_t base_seed, const std::string& agent_id,
                         const std::string& game, int trial) {
  Fnv1a64 h;
  h.add(base_seed);
  for (char c : agent_id) h.add(static_cast<unsigned char>(c));
  h.add(0xff01);
  for (char c : game) h.add(static_cast<unsigned char>(c));
  h.add(0xff02);
  h.add(static_cast<std::uint64_t>(trial));
  return h.value();
}

std::unique_ptr<Environment> build_env(const ExperimentConfig& cfg,
                                       const std::string& game, std::uint64_t seed) {
  std::unique_ptr<Environment> env =
      make_env(parse_game_spec(game), cfg.max_episode_frames);
  int stream = 0;
  for (const WrapperSpec& w : cfg.stochasticity) {
    const std::uint64_t wseed = derive_seed(seed, 100 + stream++);
    if (w.type == "sticky") {
      env = std::make_unique<StickyActions>(std::move(env), w.varsigma, w.frame_skip,
                                            wseed);
    } else if (w.type == "initial_noops") {
      env = std::make_unique<InitialNoops>(std::move(env), w.k_max, wseed);
    } else if (w.type == "action_noise") {
      env = std::make_unique<ActionNoise>(std::move(env), w.eps, wseed);
    } else if (w.type == "random_skip") {
      env = std::make_unique<RandomFrameSkip>(std::move(env), w.k1, w.k2, wseed);
    } else if (w.type == "reward") {
      env = std::make_unique<RewardTransform>(std::move(env),
                                              parse_reward_kind(w.reward_kind));
    } else {
      throw ConfigError("unknown wrapper type '" + w.type + "'");
    }
  }
  if (cfg.terminate_on_life_loss) {
    env = std::make_unique<LifeLossTermination>(std::move(env));
  }
  return env;
}

std::unique_ptr<Agent> build_agent(const AgentSpec& spec, const Environment& env,
                                   std::uint64_t seed) {
  if (spec.type == "brute") {
    return std::make_unique<BruteAgent>(env.action_count(), spec.brute, seed);
  }
  if (spec.type == "sarsa_lambda") {
    return std::make_unique<SarsaLambda>(FeatureExtractor(env.spec()), spec.sarsa, seed);
  }
  if (spec.type == "dqn_mini") {
    return std::make_unique<DqnAgent>(env.observation_size(), env.action_count(),
                                      spec.dqn, seed);
  }
  throw ConfigError("unknown agent type '" + spec.type + "'");
}

TrialRecord run_cell(const ExperimentConfig& cfg, const AgentSpec& agent,
                     const std::string& game, int trial) {
  const std::uint64_t seed = trial_seed(cfg.base_seed, agent.id, game, trial);
  auto env = build_env(cfg, game, derive_seed(seed, 0));
  auto a = build_agent(agent, *env, derive_seed(seed, 1));
  return run_trial(*a, *env, cfg.frame_budget, cfg.milestones, agent.id, game, trial,
                   seed);
}

// ---------------------------------------------------------------------------
// Artifact serialization
// ---------------------------------------------------------------------------

namespace {

std::string sanitize(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    if (c == ':') c = '-';
  }
  return out;
}

}  // namespace

std::string jsonl_filename(const std::string& agent_id, const std::string& game,
                           int trial) {
  return sanitize(agent_id) + "__" + sanitize(game) + "__t" + std::to_string(trial) +
         ".jsonl";
}

std::string record_to_jsonl(const TrialRecord& rec) {
  std::string out;
  // Header line carries trial identity; episode lines follow, one per line.
  out += "{\"agent\":\"" + rec.agent + "\",\"game\":\"" + rec.game +
         "\",\"trial\":" + std::to_string(rec.trial) +
         ",\"seed\":" + std::to_string(rec.seed) +
         ",\"failed\":" + (rec.failed ? "true" : "false") + "}\n";
  for (const EpisodeEntry& e : rec.episodes) {
    out += "{\"trial\":" + std::to_string(rec.trial) +
           ",\"episode\":" + std::to_string(e.episode) +
           ",\"score\":" + fmt_double(e.score) +
           ",\"decisions\":" + std::to_string(e.decisions) +
           ",\"frames\":" + std::to_string(e.frames) +
           ",\"cum_frames\":" + std::to_string(e.cum_frames) + "}\n";
  }
  return out;
}

TrialRecord record_from_jsonl(const std::string& text) {
  TrialRecord rec;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json obj = json::parse(line);
    if (first) {
      rec.agent = obj.at("agent").get<std::string>();
      rec.game = obj.at("game").get<std::string>();
      rec.trial = obj.at("trial").get<int>();
      rec.seed = obj.at("seed").get<std::uint64_t>();
      rec.failed = obj.at("failed").get<bool>();
      first = false;
      continue;
    }
    EpisodeEntry e;
    e.episode = obj.at("episode").get<std::int64_t>();
    e.score = obj.at("score").get<double>();
    e.decisions = obj.at("decisions").get<std::int64_t>();
    e.frames = obj.at("frames").get<std::int64_t>();
    e.cum_frames = obj.at("cum_frames").get<std::int64_t>();
    rec.episodes.push_back(e);
  }
  if (first) throw std::runtime_error("empty JSONL record");
  return rec;
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CellKey {
  std::string agent, game;
  friend bool operator<(const CellKey& a, const CellKey& b) {
    return std::tie(a.agent, a.game) < std::tie(b.agent, b.game);
  }
};

// Writes milestones.csv, welch.csv and curves/ from complete records.
// Agents/games are emitted in config order; trials sorted by index.
void write_reports(const fs::path& out_dir, const ExperimentConfig& cfg,
                   const std::vector<std::vector<TrialRecord>>& by_cell,
                   const std::vector<CellKey>& cells) {
  std::string ms_csv = "game,agent,milestone_frames,n_trials,mean,std,k\n";
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (std::int64_t m : cfg.milestones) {
      const MilestoneReport rep = aggregate(by_cell[c], m, cfg.k);
      ms_csv += cells[c].game + "," + cells[c].agent + "," + std::to_string(m) + "," +
                std::to_string(rep.n) + "," + fmt_double(rep.mean) + "," +
                fmt_double(rep.stddev) + "," + std::to_string(rep.k) + "\n";
    }
  }
  write_file(out_dir / "milestones.csv", ms_csv);

  // Welch comparisons for every agent pair at every milestone, per game.
  std::string welch_csv = "game,agent_a,agent_b,milestone,t,df,p\n";
  if (cfg.agents.size() >= 2 && cfg.trials_per_cell >= 2) {
    for (const std::string& game : cfg.games) {
      for (std::size_t i = 0; i < cfg.agents.size(); ++i) {
        for (std::size_t j = i + 1; j < cfg.agents.size(); ++j) {
          const auto find_cell = [&](const std::string& agent) -> const std::vector<TrialRecord>* {
            for (std::size_t c = 0; c < cells.size(); ++c) {
              if (cells[c].agent == agent && cells[c].game == game) return &by_cell[c];
            }
            return nullptr;
          };
          const auto* ta = find_cell(cfg.agents[i].id);
          const auto* tb = find_cell(cfg.agents[j].id);
          if (!ta || !tb) continue;
          for (std::int64_t m : cfg.milestones) {
            std::vector<double> sa, sb;
            for (const auto& t : *ta) sa.push_back(milestone_score(t, m, cfg.k));
            for (const auto& t : *tb) sb.push_back(milestone_score(t, m, cfg.k));
            const WelchResult w = welch_t_test(sa, sb);
            welch_csv += game + "," + cfg.agents[i].id + "," + cfg.agents[j].id + "," +
                         std::to_string(m) + "," + fmt_double(w.t) + "," +
                         fmt_double(w.df) + "," + fmt_double(w.p) + "\n";
          }
        }
      }
    }
  }
  write_file(out_dir / "welch.csv", welch_csv);

  fs::create_directories(out_dir / "curves");
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const std::string title = cells[c].agent + " on " + cells[c].game;
    const std::string svg = emit_curves(by_cell[c], cfg.k, title);
    write_file(out_dir / "curves" /
                   (sanitize(cells[c].agent) + "__" + sanitize(cells[c].game) + ".svg"),
               svg);
  }
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  const std::string dump = dump_config(cfg);
  Fnv1a64 h;
  for (char ch : dump) h.add(static_cast<unsigned char>(ch));
  return h.value();
}

// The run ledger tracks which games each run touched, so a "final" run can
// refuse to proceed when test games were already used by search runs.
void merge_ledger(const fs::path& path, const ExperimentConfig& cfg) {
  std::set<std::string> lines;
  if (fs::exists(path)) {
    std::istringstream in(read_file(path));
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty()) lines.insert(line);
    }
  }
  json entry;
  entry["purpose"] = cfg.purpose;
  entry["games"] = cfg.games;
  std::vector<std::string> agent_ids;
  for (const auto& a : cfg.agents) agent_ids.push_back(a.id);
  entry["agents"] = agent_ids;
  entry["config_hash"] = config_hash(cfg);
  lines.insert(entry.dump());
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  write_file(path, out);
}

bool search_runs_touched_test_games(const fs::path& path, const ExperimentConfig& cfg) {
  if (cfg.test_games.empty() || !fs::exists(path)) return false;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json entry = json::parse(line);
    if (entry.at("purpose").get<std::string>() != "search") continue;
    for (const auto& g : entry.at("games")) {
      if (std::find(cfg.test_games.begin(), cfg.test_games.end(),
                    g.get<std::string>()) != cfg.test_games.end()) {
        return true;
      }
    }
  }
  return false;
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg, int jobs, std::ostream& log) {
  const fs::path out_dir(cfg.output_dir);
  fs::create_directories(out_dir);
  fs::create_directories(out_dir / "records");

  const fs::path ledger = out_dir / "run_ledger.jsonl";
  if (cfg.purpose == "final" && search_runs_touched_test_games(ledger, cfg)) {
    log << "refusing final report: hyperparameter-search runs already touched "
           "test games (see " << ledger.string() << ")\n";
    return 1;
  }

  struct Task {
    std::size_t cell;
    const AgentSpec* agent;
    const std::string* game;
    int trial;
  };
  std::vector<CellKey> cells;
  std::vector<Task> tasks;
  for (const AgentSpec& a : cfg.agents) {
    for (const std::string& g : cfg.games) {
      cells.push_back({a.id, g});
      for (int t = 0; t < cfg.trials_per_cell; ++t) {
        tasks.push_back({cells.size() - 1, &a, &g, t});
      }
    }
  }

  std::vector<TrialRecord> results(tasks.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> any_failed{false};
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) {
        const Task& task = tasks[i];
        results[i] = run_cell(cfg, *task.agent, *task.game, task.trial);
        if (results[i].failed) any_failed = true;
      }
    });
  }
  for (auto& t : pool) t.join();

  // Deterministic collection: group by cell, order trials by index.
  std::vector<std::vector<TrialRecord>> by_cell(cells.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    by_cell[tasks[i].cell].push_back(results[i]);
  }
  for (auto& cell : by_cell) {
    std::sort(cell.begin(), cell.end(),
              [](const TrialRecord& a, const TrialRecord& b) { return a.trial < b.trial; });
  }

  write_file(out_dir / "experiment.json", dump_config(cfg));
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (const TrialRecord& rec : by_cell[c]) {
      write_file(out_dir / "records" / jsonl_filename(rec.agent, rec.game, rec.trial),
                 record_to_jsonl(rec));
      if (!rec.diagnostics.empty()) {
        json diag = json::array();
        for (const auto& d : rec.diagnostics) {
          json obj;
          obj["milestone_frames"] = d.milestone_frames;
          obj["stats"] = d.stats;
          diag.push_back(obj);
        }
        write_file(out_dir / "records" /
                       (jsonl_filename(rec.agent, rec.game, rec.trial) + ".diag.json"),
                   diag.dump(2) + "\n");
      }
    }
  }

  if (any_failed) {
    for (const auto& cell : by_cell) {
      for (const TrialRecord& rec : cell) {
        if (rec.failed) {
          log << "trial failed: " << rec.agent << " on " << rec.game << " trial "
              << rec.trial << ": " << rec.failure << "\n";
        }
      }
    }
    log << "partial artifacts kept in " << out_dir.string() << "\n";
    return 2;
  }

  write_reports(out_dir, cfg, by_cell, cells);
  merge_ledger(ledger, cfg);
  log << "wrote " << tasks.size() << " trial records to " << out_dir.string() << "\n";
  return 0;
}

int regenerate_reports(const std::string& records_dir, std::ostream& log) {
  const fs::path out_dir(records_dir);
  const fs::path cfg_path = out_dir / "experiment.json";
  if (!fs::exists(cfg_path)) {
    log << "missing " << cfg_path.string() << "\n";
    return 1;
  }
  const ExperimentConfig cfg = parse_config(read_file(cfg_path));

  std::vector<CellKey> cells;
  std::vector<std::vector<TrialRecord>> by_cell;
  for (const AgentSpec& a : cfg.agents) {
    for (const std::string& g : cfg.games) {
      std::vector<TrialRecord> trials;
      for (int t = 0; t < cfg.trials_per_cell; ++t) {
        const fs::path p = out_dir / "records" / jsonl_filename(a.id, g, t);
        if (!fs::exists(p)) {
          log << "missing record " << p.string() << "\n";
          return 1;
        }
        trials.push_back(record_from_jsonl(read_file(p)));
      }
      cells.push_back({a.id, g});
      by_cell.push_back(std::move(trials));
    }
  }
  write_reports(out_dir, cfg, by_cell, cells);
  log << "reports rebuilt from " << out_dir.string() << "\n";
  return 0;
}

}  // namespace deskrl
