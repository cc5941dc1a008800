#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace uma {

enum class Phase { Maintenance, QA };

std::string_view phase_name(Phase p);

enum class Tool {
    Add,
    Update,
    Delete,
    Retrieve,
    List,
    UpdateCore,
    Bm25,
    Embedding,
    Answer,
};

std::string_view tool_name(Tool t);
std::optional<Tool> tool_from_name(std::string_view name);

/// Write tools belong to the maintenance phase, search/answer tools to the
/// QA phase; retrieve and list are read-only and legal in both.
bool tool_in_phase(Tool t, Phase p);

struct AddArgs {
    std::string key, value;
};
struct UpdateArgs {
    std::string key, value;
};
struct DeleteArgs {
    std::string key;
};
struct RetrieveArgs {
    std::string key;
};
struct ListArgs {};
struct UpdateCoreArgs {
    std::string core;
};
struct SearchArgs {
    std::string query;
    int top_k = 0;
};
struct AnswerArgs {
    std::string text;
};

using ToolArgs = std::variant<AddArgs, UpdateArgs, DeleteArgs, RetrieveArgs, ListArgs,
                              UpdateCoreArgs, SearchArgs, AnswerArgs>;

struct ToolCall {
    Tool tool = Tool::List;
    ToolArgs args = ListArgs{};
};

/// Canonical one-line JSON rendering, e.g.
/// {"tool":"add","args":{"key":"budget","value":"$50"}}.
std::string render_call(const ToolCall& call);

enum class ParseErrorKind { NoObject, BadShape, UnknownTool, BadArgs, PhaseViolation };

std::string_view parse_error_name(ParseErrorKind k);

struct ParseFailure {
    ParseErrorKind kind = ParseErrorKind::NoObject;
    std::string message;
};

using ParseResult = std::variant<ToolCall, ParseFailure>;

/// Extracts the first well-formed {"tool": ..., "args": {...}} object in the
/// completion (prose around it is ignored, as is any JSON without that
/// shape), then validates the tool name, the argument names/arities/types,
/// and the phase toolset.
ParseResult parse_tool_call(std::string_view completion, Phase phase);

}  // namespace uma
