#include "uma/policy.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "uma/error.hpp"

namespace uma {

using nlohmann::json;

std::string ScriptedPolicy::default_completion(Phase phase) {
    if (phase == Phase::Maintenance) {
        return R"({"tool":"update_core","args":{"core":""}})";
    }
    return R"({"tool":"answer","args":{"text":""}})";
}

Completion ScriptedPolicy::complete(const std::string& /*prompt*/, Phase phase) {
    Completion c;
    if (next_ < script_.size()) {
        c.text = script_[next_++];
    } else {
        c.text = default_completion(phase);
    }
    return c;
}

Completion HttpChatPolicy::complete(const std::string& prompt, Phase /*phase*/) {
    json body;
    body["model"] = config_.model;
    body["messages"] = json::array({json{{"role", "user"}, {"content", prompt}}});
    body["temperature"] = config_.temperature;
    body["max_tokens"] = config_.max_tokens;
    if (config_.request_logprobs) body["logprobs"] = true;
    const std::string payload = body.dump();

    httplib::Headers headers;
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    std::string last_error = "no attempts made";
    int backoff = config_.backoff_ms;
    for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
            backoff *= 2;
        }
        httplib::Client client(config_.base_url);
        client.set_read_timeout(config_.timeout_seconds, 0);
        client.set_connection_timeout(config_.timeout_seconds, 0);
        auto res = client.Post("/v1/chat/completions", headers, payload, "application/json");
        if (!res) {
            last_error = "endpoint unreachable: " + config_.base_url;
            continue;
        }
        if (res->status >= 500) {
            last_error = "server error " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw TransportError("chat endpoint returned status " + std::to_string(res->status) +
                                 ": " + res->body);
        }
        json parsed = json::parse(res->body, nullptr, false);
        if (parsed.is_discarded() || !parsed.contains("choices") || parsed["choices"].empty()) {
            last_error = "malformed completion response";
            continue;
        }
        const auto& choice = parsed["choices"][0];
        Completion out;
        out.text = choice.at("message").at("content").get<std::string>();
        if (choice.contains("logprobs") && choice["logprobs"].is_object()) {
            const auto& lp = choice["logprobs"];
            auto collect = [](const json& arr) {
                std::vector<double> v;
                v.reserve(arr.size());
                for (const auto& tok : arr) v.push_back(tok.at("logprob").get<double>());
                return v;
            };
            if (lp.contains("content") && lp["content"].is_array()) {
                auto current = collect(lp["content"]);
                if (lp.contains("ref_content") && lp["ref_content"].is_array()) {
                    auto ref = collect(lp["ref_content"]);
                    if (ref.size() == current.size()) {
                        out.logprobs = std::move(current);
                        out.ref_logprobs = std::move(ref);
                    }
                }
            }
        }
        return out;
    }
    throw TransportError("chat completion failed after " +
                         std::to_string(config_.max_attempts) + " attempts (" + last_error + ")");
}

}  // namespace uma
