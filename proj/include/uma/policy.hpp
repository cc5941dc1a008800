#pragma once

#include <optional>
#include <string>
#include <vector>

#include "uma/tool_call.hpp"

namespace uma {

struct Completion {
    std::string text;
    /// Per-token log-probabilities under the sampling policy and under a
    /// reference policy, when the backend supplies them. Either both lists
    /// are present with equal length or the pair is dropped.
    std::optional<std::vector<double>> logprobs;
    std::optional<std::vector<double>> ref_logprobs;
};

/// The action source: prompt text in, raw completion out. `complete` is
/// total — it returns text or throws TransportError. Implementations must
/// either be shareable across concurrent episodes or be instantiated per
/// episode; HttpChatPolicy is stateless per request, ScriptedPolicy is not.
class Policy {
public:
    virtual ~Policy() = default;
    virtual Completion complete(const std::string& prompt, Phase phase) = 0;
};

/// Deterministic test double: replays a fixed list of completions, then
/// falls back to the phase's terminal action (update_core with an empty
/// core, or answer("")) once the script is exhausted.
class ScriptedPolicy final : public Policy {
public:
    explicit ScriptedPolicy(std::vector<std::string> script) : script_(std::move(script)) {}

    Completion complete(const std::string& prompt, Phase phase) override;

    static std::string default_completion(Phase phase);

    std::size_t consumed() const { return next_; }

private:
    std::vector<std::string> script_;
    std::size_t next_ = 0;
};

struct HttpPolicyConfig {
    std::string base_url;  // e.g. http://localhost:8000
    std::string model;
    double temperature = 0.0;
    int max_tokens = 1024;
    std::string api_key_env = "UMA_API_KEY";
    int max_attempts = 3;
    int backoff_ms = 250;  // doubled after each failed attempt
    int timeout_seconds = 120;
    bool request_logprobs = true;
};

/// Chat-completions client: one request per prompt, exponential backoff,
/// TransportError once attempts are exhausted. Token log-probabilities are
/// captured when the endpoint returns them (choices[0].logprobs.content,
/// plus an optional parallel ref_content stream for the reference policy).
class HttpChatPolicy final : public Policy {
public:
    explicit HttpChatPolicy(HttpPolicyConfig config) : config_(std::move(config)) {}

    Completion complete(const std::string& prompt, Phase phase) override;

    const HttpPolicyConfig& config() const { return config_; }

private:
    HttpPolicyConfig config_;
};

}  // namespace uma
