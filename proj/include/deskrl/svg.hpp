#pragma once

#include <string>
#include <vector>

#include "deskrl/protocol.hpp"

namespace deskrl {

/// Renders the learning curves of one (agent, game) cell as a standalone
/// SVG document: x is cumulative frames, y the trailing-k episode score.
/// Individual trials are drawn in grey, the cross-trial mean in red.
/// Output is deterministic for a fixed input.
std::string emit_curves(const std::vector<TrialRecord>& trials, int k,
                        const std::string& title);

}  // namespace deskrl
