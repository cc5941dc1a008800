#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "uma/tool_call.hpp"

namespace uma {

struct TokenLogprobs {
    std::vector<double> current;
    std::vector<double> reference;
};

struct TrajectoryStep {
    std::string raw_completion;
    std::optional<ToolCall> parsed;
    std::optional<ParseFailure> failure;
    /// False exactly when parsing failed or the tool violated the phase;
    /// domain errors (duplicate key, missing key, ...) stay valid.
    bool valid = false;
    std::string observation;
    std::optional<TokenLogprobs> logprobs;
};

struct Trajectory {
    std::string episode_id;
    /// Chunk id in maintenance ("chunk-3") or question id in QA ("q-0").
    std::string unit_id;
    Phase phase = Phase::Maintenance;
    std::vector<TrajectoryStep> steps;
    std::optional<std::string> terminal_answer;  // QA only
    /// Step cap hit: the terminal action was injected by the environment.
    bool forced = false;
};

int count_valid_steps(const Trajectory& traj);

struct TrajectoryRewards {
    double r_tool = 0.0;
    double r_outcome = 0.0;
    double total = 0.0;
};

/// A trajectory as read back from a log file, with its position in the
/// nested sampling grid when the producer recorded one.
struct LoggedTrajectory {
    Trajectory trajectory;
    std::optional<TrajectoryRewards> rewards;
    int memory_index = 0;             // i in the N x M grid
    std::optional<int> question_index;  // j; absent for memory trajectories
};

/// Line-delimited log: one record per step plus one terminal record per
/// trajectory. This file is the interface between the runner, the advantage
/// computation, and external trainers.
void write_trajectory(std::ostream& out, const Trajectory& traj,
                      const std::optional<TrajectoryRewards>& rewards, int memory_index,
                      std::optional<int> question_index);

std::vector<LoggedTrajectory> read_trajectory_log(std::istream& in);

}  // namespace uma
