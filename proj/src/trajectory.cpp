#include "uma/trajectory.hpp"

#include <istream>
#include <map>
#include <ostream>

#include "uma/error.hpp"
#include "uma/text.hpp"

namespace uma {

using nlohmann::ordered_json;

int count_valid_steps(const Trajectory& traj) {
    int n = 0;
    for (const auto& s : traj.steps) n += s.valid ? 1 : 0;
    return n;
}

namespace {

ordered_json logprobs_json(const TokenLogprobs& lp) {
    ordered_json j;
    j["current"] = lp.current;
    j["reference"] = lp.reference;
    return j;
}

}  // namespace

void write_trajectory(std::ostream& out, const Trajectory& traj,
                      const std::optional<TrajectoryRewards>& rewards, int memory_index,
                      std::optional<int> question_index) {
    for (std::size_t i = 0; i < traj.steps.size(); ++i) {
        const auto& step = traj.steps[i];
        ordered_json j;
        j["record"] = "step";
        j["episode_id"] = traj.episode_id;
        j["phase"] = std::string(phase_name(traj.phase));
        j["unit_id"] = traj.unit_id;
        j["step_index"] = i;
        j["raw_completion"] = step.raw_completion;
        if (step.parsed) {
            j["parsed_tool"] = std::string(tool_name(step.parsed->tool));
        } else {
            j["parsed_tool"] = nullptr;
        }
        j["valid"] = step.valid;
        j["observation"] = step.observation;
        if (step.logprobs) j["logprobs"] = logprobs_json(*step.logprobs);
        out << j.dump() << "\n";
    }
    ordered_json t;
    t["record"] = "terminal";
    t["episode_id"] = traj.episode_id;
    t["phase"] = std::string(phase_name(traj.phase));
    t["unit_id"] = traj.unit_id;
    t["forced"] = traj.forced;
    if (traj.terminal_answer) t["terminal_answer"] = *traj.terminal_answer;
    if (rewards) {
        t["rewards"] = ordered_json{
            {"r_tool", rewards->r_tool}, {"r_outcome", rewards->r_outcome},
            {"total", rewards->total}};
    }
    t["memory_index"] = memory_index;
    if (question_index) t["question_index"] = *question_index;
    out << t.dump() << "\n";
}

std::vector<LoggedTrajectory> read_trajectory_log(std::istream& in) {
    std::vector<LoggedTrajectory> out;
    // Steps accumulate per (episode, phase, unit) until its terminal record.
    std::map<std::string, Trajectory> open;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto j = ordered_json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw ValidationError("trajectory log line " + std::to_string(line_no) +
                                  " is not valid JSON");
        }
        const std::string record = j.value("record", "");
        const std::string episode = j.value("episode_id", "");
        const std::string unit = j.value("unit_id", "");
        const std::string phase = j.value("phase", "");
        const std::string key = episode + "\x1f" + phase + "\x1f" + unit;

        if (record == "step") {
            Trajectory& traj = open[key];
            traj.episode_id = episode;
            traj.unit_id = unit;
            traj.phase = phase == "qa" ? Phase::QA : Phase::Maintenance;
            TrajectoryStep step;
            step.raw_completion = j.value("raw_completion", "");
            step.valid = j.value("valid", false);
            step.observation = j.value("observation", "");
            if (j.contains("parsed_tool") && j["parsed_tool"].is_string()) {
                // Re-parse for the typed call; the raw completion is authoritative.
                auto parsed = parse_tool_call(step.raw_completion, traj.phase);
                if (auto* call = std::get_if<ToolCall>(&parsed)) step.parsed = *call;
            }
            if (j.contains("logprobs")) {
                TokenLogprobs lp;
                lp.current = j["logprobs"].at("current").get<std::vector<double>>();
                lp.reference = j["logprobs"].at("reference").get<std::vector<double>>();
                step.logprobs = std::move(lp);
            }
            traj.steps.push_back(std::move(step));
        } else if (record == "terminal") {
            LoggedTrajectory logged;
            auto it = open.find(key);
            if (it != open.end()) {
                logged.trajectory = std::move(it->second);
                open.erase(it);
            }
            logged.trajectory.episode_id = episode;
            logged.trajectory.unit_id = unit;
            logged.trajectory.phase = phase == "qa" ? Phase::QA : Phase::Maintenance;
            logged.trajectory.forced = j.value("forced", false);
            if (j.contains("terminal_answer")) {
                logged.trajectory.terminal_answer = j["terminal_answer"].get<std::string>();
            }
            if (j.contains("rewards")) {
                TrajectoryRewards r;
                r.r_tool = j["rewards"].value("r_tool", 0.0);
                r.r_outcome = j["rewards"].value("r_outcome", 0.0);
                r.total = j["rewards"].value("total", 0.0);
                logged.rewards = r;
            }
            logged.memory_index = j.value("memory_index", 0);
            if (j.contains("question_index")) {
                logged.question_index = j["question_index"].get<int>();
            }
            out.push_back(std::move(logged));
        } else {
            throw ValidationError("trajectory log line " + std::to_string(line_no) +
                                  " has unknown record type");
        }
    }
    return out;
}

}  // namespace uma
