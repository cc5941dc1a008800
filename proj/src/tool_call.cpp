#include "uma/tool_call.hpp"

#include <array>
#include <utility>

#include <json.hpp>

namespace uma {

using nlohmann::json;

std::string_view phase_name(Phase p) {
    return p == Phase::Maintenance ? "maintenance" : "qa";
}

namespace {

constexpr std::array<std::pair<Tool, std::string_view>, 9> kToolNames{{
    {Tool::Add, "add"},
    {Tool::Update, "update"},
    {Tool::Delete, "delete"},
    {Tool::Retrieve, "retrieve"},
    {Tool::List, "list"},
    {Tool::UpdateCore, "update_core"},
    {Tool::Bm25, "bm25"},
    {Tool::Embedding, "embedding"},
    {Tool::Answer, "answer"},
}};

}  // namespace

std::string_view tool_name(Tool t) {
    for (const auto& [tool, name] : kToolNames) {
        if (tool == t) return name;
    }
    return "?";
}

std::optional<Tool> tool_from_name(std::string_view name) {
    for (const auto& [tool, n] : kToolNames) {
        if (n == name) return tool;
    }
    return std::nullopt;
}

bool tool_in_phase(Tool t, Phase p) {
    switch (t) {
        case Tool::Retrieve:
        case Tool::List:
            return true;
        case Tool::Add:
        case Tool::Update:
        case Tool::Delete:
        case Tool::UpdateCore:
            return p == Phase::Maintenance;
        case Tool::Bm25:
        case Tool::Embedding:
        case Tool::Answer:
            return p == Phase::QA;
    }
    return false;
}

std::string render_call(const ToolCall& call) {
    json args = json::object();
    std::visit(
        [&](const auto& a) {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, AddArgs> || std::is_same_v<T, UpdateArgs>) {
                args["key"] = a.key;
                args["value"] = a.value;
            } else if constexpr (std::is_same_v<T, DeleteArgs> ||
                                 std::is_same_v<T, RetrieveArgs>) {
                args["key"] = a.key;
            } else if constexpr (std::is_same_v<T, UpdateCoreArgs>) {
                args["core"] = a.core;
            } else if constexpr (std::is_same_v<T, SearchArgs>) {
                args["query"] = a.query;
                args["top_k"] = a.top_k;
            } else if constexpr (std::is_same_v<T, AnswerArgs>) {
                args["text"] = a.text;
            }
        },
        call.args);
    json j;
    j["tool"] = std::string(tool_name(call.tool));
    j["args"] = std::move(args);
    return j.dump();
}

std::string_view parse_error_name(ParseErrorKind k) {
    switch (k) {
        case ParseErrorKind::NoObject:
            return "NoObject";
        case ParseErrorKind::BadShape:
            return "BadShape";
        case ParseErrorKind::UnknownTool:
            return "UnknownTool";
        case ParseErrorKind::BadArgs:
            return "BadArgs";
        case ParseErrorKind::PhaseViolation:
            return "PhaseViolation";
    }
    return "?";
}

namespace {

// Span of the balanced JSON value starting at s[start] == '{', honoring
// string literals and escapes. Returns npos when unbalanced.
std::size_t balanced_end(std::string_view s, std::size_t start) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < s.size(); ++i) {
        const char c = s[i];
        if (in_string) {
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            --depth;
            if (depth == 0) return i;
        }
    }
    return std::string_view::npos;
}

bool expect_string(const json& args, const char* name, std::string& out, std::string& err) {
    auto it = args.find(name);
    if (it == args.end()) {
        err = std::string("missing argument '") + name + "'";
        return false;
    }
    if (!it->is_string()) {
        err = std::string("argument '") + name + "' must be a string";
        return false;
    }
    out = it->get<std::string>();
    return true;
}

bool expect_int(const json& args, const char* name, int& out, std::string& err) {
    auto it = args.find(name);
    if (it == args.end()) {
        err = std::string("missing argument '") + name + "'";
        return false;
    }
    if (!it->is_number_integer()) {
        err = std::string("argument '") + name + "' must be an integer";
        return false;
    }
    const auto v = it->get<std::int64_t>();
    if (v < 0) {
        err = std::string("argument '") + name + "' must be >= 0";
        return false;
    }
    out = static_cast<int>(v);
    return true;
}

ParseResult validate(Tool tool, const json& args, Phase phase) {
    auto arity = [&](std::size_t expected, std::initializer_list<const char*> names,
                     std::string& err) {
        if (args.size() != expected) {
            err = "expected exactly " + std::to_string(expected) + " argument(s)";
            return false;
        }
        for (const auto& [k, v] : args.items()) {
            bool known = false;
            for (const char* n : names) {
                if (k == n) known = true;
            }
            if (!known) {
                err = "unknown argument '" + k + "'";
                return false;
            }
        }
        return true;
    };

    std::string err;
    ToolCall call;
    call.tool = tool;
    switch (tool) {
        case Tool::Add:
        case Tool::Update: {
            std::string key, value;
            if (!arity(2, {"key", "value"}, err) || !expect_string(args, "key", key, err) ||
                !expect_string(args, "value", value, err)) {
                return ParseFailure{ParseErrorKind::BadArgs, err};
            }
            if (tool == Tool::Add) {
                call.args = AddArgs{std::move(key), std::move(value)};
            } else {
                call.args = UpdateArgs{std::move(key), std::move(value)};
            }
            break;
        }
        case Tool::Delete:
        case Tool::Retrieve: {
            std::string key;
            if (!arity(1, {"key"}, err) || !expect_string(args, "key", key, err)) {
                return ParseFailure{ParseErrorKind::BadArgs, err};
            }
            if (tool == Tool::Delete) {
                call.args = DeleteArgs{std::move(key)};
            } else {
                call.args = RetrieveArgs{std::move(key)};
            }
            break;
        }
        case Tool::List: {
            if (!arity(0, {}, err)) {
                return ParseFailure{ParseErrorKind::BadArgs, err};
            }
            call.args = ListArgs{};
            break;
        }
        case Tool::UpdateCore: {
            std::string core;
            if (!arity(1, {"core"}, err) || !expect_string(args, "core", core, err)) {
                return ParseFailure{ParseErrorKind::BadArgs, err};
            }
            call.args = UpdateCoreArgs{std::move(core)};
            break;
        }
        case Tool::Bm25:
        case Tool::Embedding: {
            std::string query;
            int top_k = 0;
            if (!arity(2, {"query", "top_k"}, err) ||
                !expect_string(args, "query", query, err) ||
                !expect_int(args, "top_k", top_k, err)) {
                return ParseFailure{ParseErrorKind::BadArgs, err};
            }
            call.args = SearchArgs{std::move(query), top_k};
            break;
        }
        case Tool::Answer: {
            std::string text;
            if (!arity(1, {"text"}, err) || !expect_string(args, "text", text, err)) {
                return ParseFailure{ParseErrorKind::BadArgs, err};
            }
            call.args = AnswerArgs{std::move(text)};
            break;
        }
    }

    if (!tool_in_phase(tool, phase)) {
        return ParseFailure{ParseErrorKind::PhaseViolation,
                            std::string("tool '") + std::string(tool_name(tool)) +
                                "' is not available in the " + std::string(phase_name(phase)) +
                                " phase"};
    }
    return call;
}

}  // namespace

ParseResult parse_tool_call(std::string_view completion, Phase phase) {
    bool saw_object = false;
    for (std::size_t i = 0; i < completion.size(); ++i) {
        if (completion[i] != '{') continue;
        const std::size_t end = balanced_end(completion, i);
        if (end == std::string_view::npos) continue;
        const auto candidate = completion.substr(i, end - i + 1);
        json j = json::parse(candidate, nullptr, false);
        if (j.is_discarded() || !j.is_object()) continue;
        saw_object = true;
        auto tool_it = j.find("tool");
        auto args_it = j.find("args");
        if (tool_it == j.end() || !tool_it->is_string() || args_it == j.end() ||
            !args_it->is_object()) {
            // Not the shape we want; an inner object may still be. Keep
            // scanning from the next character.
            continue;
        }
        const std::string name = tool_it->get<std::string>();
        const auto tool = tool_from_name(name);
        if (!tool) {
            return ParseFailure{ParseErrorKind::UnknownTool, "unknown tool '" + name + "'"};
        }
        return validate(*tool, *args_it, phase);
    }
    if (saw_object) {
        return ParseFailure{ParseErrorKind::BadShape,
                            "no JSON object with \"tool\" and \"args\" fields found"};
    }
    return ParseFailure{ParseErrorKind::NoObject, "no JSON object found in completion"};
}

}  // namespace uma
