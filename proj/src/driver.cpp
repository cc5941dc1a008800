#include "uma/driver.hpp"

#include "uma/error.hpp"
#include "uma/text.hpp"

namespace uma {

std::string DriverConfig::default_maintenance_system() {
    return "You are maintaining a persistent memory over a stream of text chunks.\n"
           "Read the current focus chunk and record everything worth keeping in your "
           "key-value memory bank.\n"
           "Available tools: add(key, value), update(key, value), delete(key), "
           "retrieve(key), list().\n"
           "When the chunk is fully processed, call update_core(core) with a complete "
           "replacement summary of everything learned so far; this commits your progress "
           "and moves to the next chunk.\n"
           "Respond with exactly one JSON tool call per turn, formatted as "
           "{\"tool\": \"<name>\", \"args\": {...}}.";
}

std::string DriverConfig::default_qa_system() {
    return "You are answering a question using the memory you built earlier plus raw-text "
           "search over the original chunks.\n"
           "Available tools: retrieve(key), list(), bm25(query, top_k), "
           "embedding(query, top_k), answer(text).\n"
           "Gather evidence with the read-only tools, then call answer(text) with the "
           "final answer. Keep the answer short and literal.\n"
           "Respond with exactly one JSON tool call per turn, formatted as "
           "{\"tool\": \"<name>\", \"args\": {...}}.";
}

namespace {

TrajectoryStep make_step(const Completion& completion) {
    TrajectoryStep step;
    step.raw_completion = completion.text;
    if (completion.logprobs && completion.ref_logprobs &&
        completion.logprobs->size() == completion.ref_logprobs->size()) {
        step.logprobs = TokenLogprobs{*completion.logprobs, *completion.ref_logprobs};
    }
    return step;
}

}  // namespace

Trajectory run_maintenance(Policy& policy, Episode& episode, const DriverConfig& config,
                           const std::string& episode_id) {
    if (episode.phase() != Phase::Maintenance) {
        throw PhaseViolationError("run_maintenance requires the maintenance phase");
    }
    Trajectory traj;
    traj.episode_id = episode_id;
    traj.unit_id = "chunk-" + std::to_string(episode.cursor());
    traj.phase = Phase::Maintenance;

    for (int i = 0; i < config.limits.max_inner_steps; ++i) {
        const std::string prompt =
            assemble_input(config.system_maintenance, episode.bank().core(), episode.focus(),
                           episode.history(), config.budget);
        const Completion completion = policy.complete(prompt, Phase::Maintenance);
        TrajectoryStep step = make_step(completion);

        auto parsed = parse_tool_call(completion.text, Phase::Maintenance);
        if (auto* failure = std::get_if<ParseFailure>(&parsed)) {
            step.failure = *failure;
            step.valid = false;
            step.observation = "Error: invalid action (" +
                               std::string(parse_error_name(failure->kind)) + "): " +
                               failure->message;
            episode.note_invalid(completion.text, step.observation);
            traj.steps.push_back(std::move(step));
            continue;
        }

        const ToolCall call = std::get<ToolCall>(parsed);
        step.parsed = call;
        step.valid = true;
        if (call.tool == Tool::UpdateCore) {
            step.observation = "Success";
            traj.steps.push_back(std::move(step));
            episode.update_core_and_advance(std::get<UpdateCoreArgs>(call.args).core);
            return traj;
        }
        step.observation = episode.step(call).observation;
        traj.steps.push_back(std::move(step));
    }

    traj.forced = true;
    episode.force_advance();
    return traj;
}

Trajectory run_qa(Policy& policy, Episode& episode, const std::string& query,
                  const DriverConfig& config, const std::string& episode_id,
                  const std::string& query_id) {
    episode.begin_query(query);

    Trajectory traj;
    traj.episode_id = episode_id;
    traj.unit_id = query_id;
    traj.phase = Phase::QA;

    for (int i = 0; i < config.limits.max_qa_steps; ++i) {
        const std::string prompt = assemble_input(config.system_qa, episode.bank().core(),
                                                  episode.focus(), episode.history(),
                                                  config.budget);
        const Completion completion = policy.complete(prompt, Phase::QA);
        TrajectoryStep step = make_step(completion);

        auto parsed = parse_tool_call(completion.text, Phase::QA);
        if (auto* failure = std::get_if<ParseFailure>(&parsed)) {
            step.failure = *failure;
            step.valid = false;
            step.observation = "Error: invalid action (" +
                               std::string(parse_error_name(failure->kind)) + "): " +
                               failure->message;
            episode.note_invalid(completion.text, step.observation);
            traj.steps.push_back(std::move(step));
            continue;
        }

        const ToolCall call = std::get<ToolCall>(parsed);
        step.parsed = call;
        step.valid = true;
        if (call.tool == Tool::Answer) {
            step.observation = "Answer submitted";
            traj.steps.push_back(std::move(step));
            traj.terminal_answer = std::get<AnswerArgs>(call.args).text;
            return traj;
        }
        step.observation = episode.step(call).observation;
        traj.steps.push_back(std::move(step));
    }

    traj.forced = true;
    traj.terminal_answer = "";
    return traj;
}

}  // namespace uma
