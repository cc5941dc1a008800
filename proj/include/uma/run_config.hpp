#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "uma/tool_call.hpp"
#include "uma/tsgrpo.hpp"

namespace uma {

struct PolicyConfig {
    std::string kind = "http";  // http | scripted | perfect
    std::string base_url;
    std::string model;
    double temperature = 0.0;
    int max_tokens = 1024;
    std::string script_file;  // scripted only
};

struct EmbeddingConfig {
    std::string kind = "hashed";  // hashed | remote
    int dimension = 256;
    std::string base_url;
    std::string model;
};

struct JudgeEndpointConfig {
    std::string base_url;
    std::string model;
};

/// Everything a run needs, with all defaults materialized on load so the
/// config hash is stable. The hash covers the semantic knobs only — not the
/// dataset path, output directory, or worker count.
struct RunConfig {
    std::string dataset;
    std::string method = "uma";  // uma | concat | rag
    PolicyConfig policy;
    EmbeddingConfig embedding;
    std::size_t budget_max_tokens = 16384;
    std::string token_counter = "words";
    int max_inner_steps = 16;
    int max_qa_steps = 16;
    ObjectiveConfig objective;
    std::string score_mode = "numeric";  // numeric | exact | judge
    JudgeEndpointConfig judge;
    std::uint64_t seed = 0;
    std::string output_dir;
    int jobs = 1;
    int memory_rollouts = 1;

    static RunConfig from_json(const nlohmann::ordered_json& j);
    nlohmann::ordered_json to_json() const;
    std::string hash() const;
    void validate() const;  // throws ValidationError
};

RunConfig load_run_config(const std::string& path);

struct SampleStatus {
    std::string sample_id;
    std::string status;  // "done" | "failed"
    std::string error;
    std::vector<std::string> artifacts;
    long wall_ms = 0;
};

struct RunManifest {
    std::string config_hash;
    std::string dataset_hash;
    std::vector<SampleStatus> samples;

    nlohmann::ordered_json to_json() const;
    static RunManifest from_json(const nlohmann::ordered_json& j);
};

/// Temp-file-plus-rename write so concurrent workers and interrupted runs
/// never leave partial records behind.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);  // throws ValidationError

std::string file_hash_hex(const std::string& path);

}  // namespace uma
