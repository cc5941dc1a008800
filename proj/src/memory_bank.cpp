#include "uma/memory_bank.hpp"

#include "uma/error.hpp"
#include "uma/text.hpp"

namespace uma {

namespace {

std::string quoted(std::string_view key) {
    std::string out = "'";
    out += key;
    out += "'";
    return out;
}

}  // namespace

std::ptrdiff_t MemoryBank::find(std::string_view key) const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].key == key) return static_cast<std::ptrdiff_t>(i);
    }
    return -1;
}

ToolOutcome MemoryBank::add(std::string_view key, std::string_view value) {
    const std::string_view k = trim(key);
    if (k.empty()) {
        return ToolOutcome::failure(ToolError::EmptyKey, "Error: key must not be empty.");
    }
    if (value.size() > kMaxValueChars) {
        return ToolOutcome::failure(ToolError::ValueTooLarge,
                                    "Error: value exceeds 8192 characters.");
    }
    if (find(k) >= 0) {
        return ToolOutcome::failure(ToolError::DuplicateKey,
                                    "Error: key " + quoted(k) + " already exists.");
    }
    entries_.push_back({std::string(k), std::string(value)});
    return ToolOutcome::success("Success");
}

ToolOutcome MemoryBank::update(std::string_view key, std::string_view value) {
    const std::string_view k = trim(key);
    if (value.size() > kMaxValueChars) {
        return ToolOutcome::failure(ToolError::ValueTooLarge,
                                    "Error: value exceeds 8192 characters.");
    }
    const std::ptrdiff_t i = find(k);
    if (i < 0) {
        return ToolOutcome::failure(ToolError::KeyNotFound,
                                    "Error: key " + quoted(k) + " not found.");
    }
    entries_[static_cast<std::size_t>(i)].value = std::string(value);
    return ToolOutcome::success("Success");
}

ToolOutcome MemoryBank::erase(std::string_view key) {
    const std::string_view k = trim(key);
    const std::ptrdiff_t i = find(k);
    if (i < 0) {
        return ToolOutcome::failure(ToolError::KeyNotFound,
                                    "Error: key " + quoted(k) + " not found.");
    }
    entries_.erase(entries_.begin() + i);
    return ToolOutcome::success("Success");
}

ToolOutcome MemoryBank::retrieve(std::string_view key) const {
    const std::string_view k = trim(key);
    const std::ptrdiff_t i = find(k);
    if (i < 0) {
        return ToolOutcome::failure(ToolError::KeyNotFound,
                                    "Error: key " + quoted(k) + " not found.");
    }
    ToolOutcome o = ToolOutcome::success("Success");
    o.payload = entries_[static_cast<std::size_t>(i)].value;
    return o;
}

ToolOutcome MemoryBank::list_keys() const {
    ToolOutcome o = ToolOutcome::success("Success");
    std::vector<std::string> keys;
    keys.reserve(entries_.size());
    for (const Entry& e : entries_) keys.push_back(e.key);
    o.key_list = std::move(keys);
    return o;
}

nlohmann::ordered_json MemoryBank::to_json() const {
    nlohmann::ordered_json j;
    j["core"] = core_;
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const Entry& e : entries_) {
        arr.push_back({{"key", e.key}, {"value", e.value}});
    }
    j["entries"] = std::move(arr);
    return j;
}

MemoryBank MemoryBank::from_json(const nlohmann::ordered_json& j) {
    MemoryBank bank;
    bank.core_ = j.value("core", std::string());
    if (j.contains("entries")) {
        for (const auto& e : j.at("entries")) {
            bank.entries_.push_back({e.at("key").get<std::string>(),
                                     e.at("value").get<std::string>()});
        }
    }
    return bank;
}

std::string MemoryBank::snapshot() const {
    return to_json().dump(2);
}

MemoryBank MemoryBank::from_snapshot(std::string_view text) {
    auto j = nlohmann::ordered_json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ValidationError("bank snapshot is not valid JSON");
    return from_json(j);
}

}  // namespace uma
