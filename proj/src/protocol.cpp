#include "deskrl/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace deskrl {

TrialRecord run_trial(Agent& agent, Environment& env, std::int64_t frame_budget,
                      const std::vector<std::int64_t>& milestones,
                      std::string agent_id, std::string game_id, int trial,
                      std::uint64_t seed) {
  for (std::size_t i = 1; i < milestones.size(); ++i) {
    if (milestones[i] < milestones[i - 1]) {
      throw std::invalid_argument("milestones must be sorted ascending");
    }
  }
  if (!milestones.empty() && milestones.back() > frame_budget) {
    throw std::invalid_argument("milestones must not exceed the frame budget");
  }
  TrialRecord rec;
  rec.agent = std::move(agent_id);
  rec.game = std::move(game_id);
  rec.trial = trial;
  rec.seed = seed;
  std::int64_t cum = 0;
  std::size_t next_ms = 0;
  try {
    while (cum < frame_budget) {
      const EpisodeStats stats = agent.play_episode(env);
      cum += stats.frames;
      rec.episodes.push_back({static_cast<std::int64_t>(rec.episodes.size()),
                              stats.score, stats.decisions, stats.frames, cum});
      while (next_ms < milestones.size() && cum >= milestones[next_ms]) {
        rec.diagnostics.push_back({milestones[next_ms], agent.diagnostics()});
        ++next_ms;
      }
    }
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.failure = e.what();
  }
  return rec;
}

namespace {

// Index of the first episode whose cumulative frames reach the milestone.
std::size_t milestone_boundary(const TrialRecord& trial, std::int64_t milestone) {
  for (std::size_t i = 0; i < trial.episodes.size(); ++i) {
    if (trial.episodes[i].cum_frames >= milestone) return i;
  }
  throw std::invalid_argument("trial never reached milestone " +
                              std::to_string(milestone));
}

double trailing_mean(const std::vector<EpisodeEntry>& eps, std::size_t end_inclusive,
                     int k) {
  const std::size_t available = end_inclusive + 1;
  const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), available);
  double s = 0.0;
  for (std::size_t i = available - take; i < available; ++i) s += eps[i].score;
  return s / static_cast<double>(take);
}

}  // namespace

double milestone_score(const TrialRecord& trial, std::int64_t milestone, int k) {
  if (trial.episodes.empty()) throw std::invalid_argument("empty trial record");
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  return trailing_mean(trial.episodes, milestone_boundary(trial, milestone), k);
}

MilestoneReport aggregate(const std::vector<TrialRecord>& trials,
                          std::int64_t milestone, int k) {
  if (trials.empty()) throw std::invalid_argument("aggregate needs >= 1 trial");
  std::vector<double> scores;
  scores.reserve(trials.size());
  for (const TrialRecord& t : trials) scores.push_back(milestone_score(t, milestone, k));
  MilestoneReport rep;
  rep.milestone_frames = milestone;
  rep.k = k;
  rep.n = static_cast<int>(scores.size());
  rep.mean = mean(scores);
  if (scores.size() == 1) {
    rep.stddev = 0.0;
    rep.degenerate_n = true;
  } else {
    rep.stddev = std::sqrt(sample_variance(scores));
  }
  return rep;
}

SummaryMetrics summary_metrics(const TrialRecord& trial, int k) {
  if (trial.episodes.empty()) throw std::invalid_argument("empty trial record");
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  SummaryMetrics m;
  m.k = k;
  double weighted = 0.0, frames = 0.0;
  for (const EpisodeEntry& e : trial.episodes) {
    weighted += e.score * static_cast<double>(e.frames);
    frames += static_cast<double>(e.frames);
  }
  m.auc = weighted / frames;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < trial.episodes.size(); ++i) {
    best = std::max(best, trailing_mean(trial.episodes, i, k));
  }
  m.best_window = best;
  m.final_window = trailing_mean(trial.episodes, trial.episodes.size() - 1, k);
  return m;
}

}  // namespace deskrl
