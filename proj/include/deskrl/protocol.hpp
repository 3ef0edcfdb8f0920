#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "deskrl/agent.hpp"
#include "deskrl/stats.hpp"

namespace deskrl {

struct EpisodeEntry {
  std::int64_t episode = 0;
  double score = 0.0;  // raw episode score
  std::int64_t decisions = 0;
  std::int64_t frames = 0;
  std::int64_t cum_frames = 0;
};

struct MilestoneDiagnostics {
  std::int64_t milestone_frames = 0;
  std::map<std::string, double> stats;
};

/// Per-episode log of one seeded agent-environment run; the unit all
/// protocol statistics are computed from.
struct TrialRecord {
  std::string agent;
  std::string game;
  int trial = 0;
  std::uint64_t seed = 0;
  std::vector<EpisodeEntry> episodes;
  std::vector<MilestoneDiagnostics> diagnostics;
  bool failed = false;
  std::string failure;
};

/// Trains continually until the cumulative frame count reaches the budget,
/// always finishing the episode in progress. Milestone diagnostics are
/// captured at the first episode boundary at or past each milestone.
/// On an agent/environment error the partial record is returned with the
/// failure marker set.
TrialRecord run_trial(Agent& agent, Environment& env, std::int64_t frame_budget,
                      const std::vector<std::int64_t>& milestones,
                      std::string agent_id, std::string game_id, int trial,
                      std::uint64_t seed);

/// Mean of the last min(k, available) episode scores at the first episode
/// boundary whose cumulative frames reach the milestone.
double milestone_score(const TrialRecord& trial, std::int64_t milestone, int k);

struct MilestoneReport {
  std::int64_t milestone_frames = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample (n-1) standard deviation over trials
  int n = 0;
  int k = 0;
  bool degenerate_n = false;  // single trial: stddev reported as 0
};

MilestoneReport aggregate(const std::vector<TrialRecord>& trials,
                          std::int64_t milestone, int k);

struct SummaryMetrics {
  double auc = 0.0;           // frame-weighted mean episode score
  double best_window = 0.0;   // max trailing-k window mean (biased estimate)
  double final_window = 0.0;  // trailing-k mean at the end of the run
  int k = 0;
};

SummaryMetrics summary_metrics(const TrialRecord& trial, int k);

}  // namespace deskrl
