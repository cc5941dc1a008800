#include "uma/tokens.hpp"

#include "uma/error.hpp"
#include "uma/text.hpp"

namespace uma {

TokenCounter TokenCounter::words() {
    return TokenCounter("words", [](std::string_view text) {
        // ceil(words * 1.3) in integer arithmetic
        return (word_count(text) * 13 + 9) / 10;
    });
}

TokenCounter TokenCounter::unit() {
    return TokenCounter("unit", [](std::string_view text) { return text.size(); });
}

TokenCounter TokenCounter::by_name(std::string_view name) {
    if (name == "words") return words();
    if (name == "unit") return unit();
    throw ValidationError("unknown token counter: " + std::string(name));
}

}  // namespace uma
