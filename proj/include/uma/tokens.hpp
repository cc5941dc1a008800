#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>

namespace uma {

/// Named token-counting strategy. "words" approximates a subword tokenizer
/// as ceil(whitespace-delimited words * 1.3); "unit" counts one token per
/// character, which makes truncation arithmetic exact in tests.
class TokenCounter {
public:
    TokenCounter() : TokenCounter(words()) {}

    static TokenCounter words();
    static TokenCounter unit();

    /// Throws ValidationError for unknown names.
    static TokenCounter by_name(std::string_view name);

    std::size_t count(std::string_view text) const { return fn_(text); }
    const std::string& name() const { return name_; }

private:
    TokenCounter(std::string name, std::function<std::size_t(std::string_view)> fn)
        : name_(std::move(name)), fn_(std::move(fn)) {}

    std::string name_;
    std::function<std::size_t(std::string_view)> fn_;
};

struct PromptBudget {
    std::size_t max_tokens = 16384;
    TokenCounter counter;
};

}  // namespace uma
