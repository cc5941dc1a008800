#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace uma {

enum class ToolError {
    None,
    DuplicateKey,
    KeyNotFound,
    EmptyKey,
    ValueTooLarge,
};

/// Result of a bank tool invocation. Domain errors are ordinary outcomes:
/// the agent sees `message` as an observation and the episode continues.
struct ToolOutcome {
    bool ok = false;
    ToolError error = ToolError::None;
    std::string message;
    std::optional<std::string> payload;               // Retrieve: the stored value
    std::optional<std::vector<std::string>> key_list; // List: keys in insertion order

    static ToolOutcome success(std::string message) {
        ToolOutcome o;
        o.ok = true;
        o.message = std::move(message);
        return o;
    }
    static ToolOutcome failure(ToolError error, std::string message) {
        ToolOutcome o;
        o.error = error;
        o.message = std::move(message);
        return o;
    }
};

/// Ordered key/value store plus the running core summary. Keys are unique,
/// compared case-sensitively after trimming outer whitespace; insertion
/// order is preserved and is exactly the order List reports.
class MemoryBank {
public:
    static constexpr std::size_t kMaxValueChars = 8192;

    struct Entry {
        std::string key;
        std::string value;
    };

    ToolOutcome add(std::string_view key, std::string_view value);
    ToolOutcome update(std::string_view key, std::string_view value);
    ToolOutcome erase(std::string_view key);
    ToolOutcome retrieve(std::string_view key) const;
    ToolOutcome list_keys() const;

    /// Replaces the core summary wholesale; entries are untouched.
    void set_core(std::string new_core) { core_ = std::move(new_core); }
    const std::string& core() const { return core_; }

    const std::vector<Entry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    /// Snapshot document: {"core": ..., "entries": [{"key","value"}...]},
    /// field order stable for byte-identical logs.
    nlohmann::ordered_json to_json() const;
    static MemoryBank from_json(const nlohmann::ordered_json& j);
    std::string snapshot() const;
    static MemoryBank from_snapshot(std::string_view text);

private:
    std::vector<Entry> entries_;
    std::string core_;

    std::ptrdiff_t find(std::string_view key) const;
};

}  // namespace uma
