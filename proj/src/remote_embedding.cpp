#include <cmath>
#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "uma/error.hpp"
#include "uma/retrieval.hpp"

namespace uma {

using nlohmann::json;

RemoteEmbedding::RemoteEmbedding(RemoteEmbeddingConfig config)
    : config_(std::move(config)), name_("remote:" + config_.model) {}

std::vector<double> RemoteEmbedding::embed(const std::string& text) const {
    return embed_batch({text}).front();
}

std::vector<std::vector<double>> RemoteEmbedding::embed_batch(
    const std::vector<std::string>& texts) const {
    httplib::Client client(config_.base_url);
    client.set_read_timeout(config_.timeout_seconds, 0);
    client.set_connection_timeout(config_.timeout_seconds, 0);

    httplib::Headers headers;
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    json body;
    body["model"] = config_.model;
    body["input"] = texts;

    auto res = client.Post("/v1/embeddings", headers, body.dump(), "application/json");
    if (!res || res->status != 200) {
        throw ProviderFailure("embedding endpoint " + config_.base_url +
                              (res ? " returned status " + std::to_string(res->status)
                                   : " is unreachable"));
    }
    json parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("data") || !parsed["data"].is_array() ||
        parsed["data"].size() != texts.size()) {
        throw ProviderFailure("embedding endpoint returned a malformed response");
    }

    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const auto& item : parsed["data"]) {
        std::vector<double> v = item.at("embedding").get<std::vector<double>>();
        if (v.empty()) throw ProviderFailure("embedding endpoint returned an empty vector");
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0.0) throw ProviderFailure("embedding endpoint returned a zero vector");
        for (double& x : v) x /= norm;
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace uma
