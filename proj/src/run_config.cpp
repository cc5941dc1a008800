#include "uma/run_config.hpp"

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "uma/error.hpp"
#include "uma/text.hpp"

namespace uma {

using nlohmann::ordered_json;

namespace {

template <typename T>
void read_field(const ordered_json& j, const char* name, T& out) {
    if (j.contains(name)) out = j.at(name).get<T>();
}

}  // namespace

RunConfig RunConfig::from_json(const ordered_json& j) {
    RunConfig c;
    read_field(j, "dataset", c.dataset);
    read_field(j, "method", c.method);
    if (j.contains("policy")) {
        const auto& p = j["policy"];
        read_field(p, "kind", c.policy.kind);
        read_field(p, "base_url", c.policy.base_url);
        read_field(p, "model", c.policy.model);
        read_field(p, "temperature", c.policy.temperature);
        read_field(p, "max_tokens", c.policy.max_tokens);
        read_field(p, "script_file", c.policy.script_file);
    }
    if (j.contains("embedding")) {
        const auto& e = j["embedding"];
        read_field(e, "kind", c.embedding.kind);
        read_field(e, "dimension", c.embedding.dimension);
        read_field(e, "base_url", c.embedding.base_url);
        read_field(e, "model", c.embedding.model);
    }
    if (j.contains("budget")) {
        const auto& b = j["budget"];
        read_field(b, "max_tokens", c.budget_max_tokens);
        read_field(b, "counter", c.token_counter);
    }
    if (j.contains("limits")) {
        const auto& l = j["limits"];
        read_field(l, "max_inner_steps", c.max_inner_steps);
        read_field(l, "max_qa_steps", c.max_qa_steps);
    }
    if (j.contains("tsgrpo")) {
        const auto& t = j["tsgrpo"];
        read_field(t, "epsilon", c.objective.epsilon);
        read_field(t, "beta", c.objective.beta);
        read_field(t, "lambda_tool", c.objective.lambda_tool);
        read_field(t, "sigma_floor", c.objective.sigma_floor);
        read_field(t, "memory_tool_reward", c.objective.memory_tool_reward);
    }
    read_field(j, "score_mode", c.score_mode);
    if (j.contains("judge")) {
        const auto& jj = j["judge"];
        read_field(jj, "base_url", c.judge.base_url);
        read_field(jj, "model", c.judge.model);
    }
    read_field(j, "seed", c.seed);
    read_field(j, "output_dir", c.output_dir);
    read_field(j, "jobs", c.jobs);
    read_field(j, "memory_rollouts", c.memory_rollouts);
    return c;
}

ordered_json RunConfig::to_json() const {
    ordered_json j;
    j["dataset"] = dataset;
    j["method"] = method;
    j["policy"] = ordered_json{{"kind", policy.kind},
                               {"base_url", policy.base_url},
                               {"model", policy.model},
                               {"temperature", policy.temperature},
                               {"max_tokens", policy.max_tokens},
                               {"script_file", policy.script_file}};
    j["embedding"] = ordered_json{{"kind", embedding.kind},
                                  {"dimension", embedding.dimension},
                                  {"base_url", embedding.base_url},
                                  {"model", embedding.model}};
    j["budget"] = ordered_json{{"max_tokens", budget_max_tokens}, {"counter", token_counter}};
    j["limits"] =
        ordered_json{{"max_inner_steps", max_inner_steps}, {"max_qa_steps", max_qa_steps}};
    j["tsgrpo"] = ordered_json{{"epsilon", objective.epsilon},
                               {"beta", objective.beta},
                               {"lambda_tool", objective.lambda_tool},
                               {"sigma_floor", objective.sigma_floor},
                               {"memory_tool_reward", objective.memory_tool_reward}};
    j["score_mode"] = score_mode;
    j["judge"] = ordered_json{{"base_url", judge.base_url}, {"model", judge.model}};
    j["seed"] = seed;
    j["output_dir"] = output_dir;
    j["jobs"] = jobs;
    j["memory_rollouts"] = memory_rollouts;
    return j;
}

std::string RunConfig::hash() const {
    // Semantic knobs only. Same experiment, different machine layout or
    // parallelism -> same hash.
    ordered_json j = to_json();
    j.erase("dataset");
    j.erase("output_dir");
    j.erase("jobs");
    return hex64(fnv1a64(j.dump()));
}

void RunConfig::validate() const {
    if (method != "uma" && method != "concat" && method != "rag") {
        throw ValidationError("unknown method: " + method);
    }
    if (policy.kind != "http" && policy.kind != "scripted" && policy.kind != "perfect") {
        throw ValidationError("unknown policy kind: " + policy.kind);
    }
    if (policy.kind == "http" && policy.base_url.empty()) {
        throw ValidationError("http policy requires policy.base_url");
    }
    if (policy.kind == "scripted" && policy.script_file.empty()) {
        throw ValidationError("scripted policy requires policy.script_file");
    }
    if (embedding.kind != "hashed" && embedding.kind != "remote") {
        throw ValidationError("unknown embedding kind: " + embedding.kind);
    }
    if (embedding.kind == "remote" && embedding.base_url.empty()) {
        throw ValidationError("remote embedding requires embedding.base_url");
    }
    if (score_mode != "numeric" && score_mode != "exact" && score_mode != "judge") {
        throw ValidationError("unknown score mode: " + score_mode);
    }
    if (score_mode == "judge" && judge.base_url.empty()) {
        throw ValidationError("judge score mode requires judge.base_url");
    }
    if (budget_max_tokens == 0) throw ValidationError("budget must be positive");
    if (max_inner_steps <= 0 || max_qa_steps <= 0) {
        throw ValidationError("step limits must be positive");
    }
    if (jobs <= 0) throw ValidationError("jobs must be positive");
    if (memory_rollouts <= 0) throw ValidationError("memory_rollouts must be positive");
    if (objective.epsilon <= 0.0 || objective.epsilon >= 1.0) {
        throw ValidationError("epsilon must be in (0, 1)");
    }
    if (objective.beta < 0.0 || objective.lambda_tool < 0.0) {
        throw ValidationError("beta and lambda_tool must be nonnegative");
    }
}

RunConfig load_run_config(const std::string& path) {
    const auto text = read_file(path);
    auto j = ordered_json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ValidationError("config file is not valid JSON: " + path);
    return RunConfig::from_json(j);
}

ordered_json RunManifest::to_json() const {
    ordered_json j;
    j["config_hash"] = config_hash;
    j["dataset_hash"] = dataset_hash;
    ordered_json samples_json = ordered_json::array();
    for (const auto& s : samples) {
        ordered_json sj;
        sj["sample_id"] = s.sample_id;
        sj["status"] = s.status;
        if (!s.error.empty()) sj["error"] = s.error;
        sj["artifacts"] = s.artifacts;
        sj["wall_ms"] = s.wall_ms;
        samples_json.push_back(std::move(sj));
    }
    j["samples"] = std::move(samples_json);
    return j;
}

RunManifest RunManifest::from_json(const ordered_json& j) {
    RunManifest m;
    m.config_hash = j.value("config_hash", "");
    m.dataset_hash = j.value("dataset_hash", "");
    if (j.contains("samples")) {
        for (const auto& sj : j["samples"]) {
            SampleStatus s;
            s.sample_id = sj.value("sample_id", "");
            s.status = sj.value("status", "");
            s.error = sj.value("error", "");
            if (sj.contains("artifacts")) {
                s.artifacts = sj["artifacts"].get<std::vector<std::string>>();
            }
            s.wall_ms = sj.value("wall_ms", 0L);
            m.samples.push_back(std::move(s));
        }
    }
    return m;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    char suffix[32];
    std::snprintf(suffix, sizeof(suffix), ".tmp.%d", static_cast<int>(::getpid()));
    const fs::path tmp = target.string() + suffix;
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string file_hash_hex(const std::string& path) {
    return hex64(fnv1a64(read_file(path)));
}

}  // namespace uma
