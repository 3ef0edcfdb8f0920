#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "deskrl/config.hpp"
#include "deskrl/protocol.hpp"

namespace deskrl {

/// Stable 64-bit trial seed from the (base_seed, agent, game, trial)
/// quadruple. Pure: independent of execution order and parallelism.
std::uint64_t trial_seed(std::uint64_t base_seed, const std::string& agent_id,
                         const std::string& game, int trial);

/// Builds the wrapped environment for one trial. Wrapper entries are
/// applied in list order, the first entry sitting closest to the game.
std::unique_ptr<Environment> build_env(const ExperimentConfig& cfg,
                                       const std::string& game, std::uint64_t seed);

/// Builds a fresh agent for one trial.
std::unique_ptr<Agent> build_agent(const AgentSpec& spec, const Environment& env,
                                   std::uint64_t seed);

/// Runs one (agent, game, trial) cell.
TrialRecord run_cell(const ExperimentConfig& cfg, const AgentSpec& agent,
                     const std::string& game, int trial);

/// Runs the whole grid with a bounded worker pool and writes all artifacts
/// under cfg.output_dir. Returns a process exit code: 0 on success, 1 on a
/// refused run (train/test guard), 2 when any trial failed (partial
/// artifacts are kept).
int run_experiment(const ExperimentConfig& cfg, int jobs, std::ostream& log);

/// Rebuilds milestone/comparison CSVs and curve SVGs from the JSONL
/// records in an output directory, without re-running trials.
int regenerate_reports(const std::string& records_dir, std::ostream& log);

// Artifact helpers (also used by `report` and the tests).
std::string jsonl_filename(const std::string& agent_id, const std::string& game,
                           int trial);
std::string record_to_jsonl(const TrialRecord& rec);
TrialRecord record_from_jsonl(const std::string& text);

}  // namespace deskrl
