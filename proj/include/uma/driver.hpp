#pragma once

#include <string>

#include "uma/episode.hpp"
#include "uma/policy.hpp"
#include "uma/trajectory.hpp"

namespace uma {

/// Phase-specific system instructions plus the loop limits. The instruction
/// text is configuration, not a fixed contract; these defaults describe the
/// tool grammar the parser accepts.
struct DriverConfig {
    std::string system_maintenance = default_maintenance_system();
    std::string system_qa = default_qa_system();
    PromptBudget budget;
    StepLimits limits;

    static std::string default_maintenance_system();
    static std::string default_qa_system();
};

/// Runs the inner loop for the episode's current chunk: assemble prompt,
/// complete, parse, execute; ends on update_core or at max_inner_steps
/// (which forces an advance with the core unchanged). The episode is left
/// positioned at the next chunk, or in the QA phase after the last one.
/// TransportError from the policy propagates and aborts the episode.
Trajectory run_maintenance(Policy& policy, Episode& episode, const DriverConfig& config,
                           const std::string& episode_id);

/// Runs the QA loop for one query on the episode's final memory: ends on
/// answer(text) or at max_qa_steps (which forces an empty answer). The bank
/// is never mutated; each query starts from a cleared history.
Trajectory run_qa(Policy& policy, Episode& episode, const std::string& query,
                  const DriverConfig& config, const std::string& episode_id,
                  const std::string& query_id);

}  // namespace uma
