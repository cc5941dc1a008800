#include "uma/money.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>

namespace uma {

namespace {

bool is_digit(char c) {
    return c >= '0' && c <= '9';
}

}  // namespace

std::string Money::str() const {
    std::int64_t c = cents_;
    const char* sign = "";
    if (c < 0) {
        sign = "-";
        c = -c;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%lld.%02lld", sign, static_cast<long long>(c / 100),
                  static_cast<long long>(c % 100));
    return buf;
}

std::optional<Money> Money::parse(std::string_view s) {
    if (s.empty()) return std::nullopt;
    std::size_t i = 0;
    bool neg = false;
    if (s[i] == '-') {
        neg = true;
        ++i;
    }
    if (i >= s.size() || !is_digit(s[i])) return std::nullopt;
    std::int64_t whole = 0;
    while (i < s.size() && is_digit(s[i])) {
        whole = whole * 10 + (s[i] - '0');
        ++i;
    }
    std::int64_t cents = whole * 100;
    if (i < s.size()) {
        if (s[i] != '.') return std::nullopt;
        ++i;
        if (i >= s.size()) return std::nullopt;
        int frac_digits = 0;
        std::int64_t frac = 0;
        while (i < s.size() && is_digit(s[i]) && frac_digits < 2) {
            frac = frac * 10 + (s[i] - '0');
            ++i;
            ++frac_digits;
        }
        if (frac_digits == 1) frac *= 10;
        if (i < s.size()) return std::nullopt;  // more than two fractional digits
        cents += frac;
    }
    return Money::from_cents(neg ? -cents : cents);
}

std::optional<std::int64_t> first_decimal_cents(std::string_view text) {
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n && !is_digit(text[i])) ++i;
    if (i == n) return std::nullopt;

    bool neg = i > 0 && text[i - 1] == '-';
    std::int64_t whole = 0;
    while (i < n && (is_digit(text[i]) || text[i] == ',')) {
        if (text[i] == ',') {
            // thousands separator only between digits
            if (i + 1 >= n || !is_digit(text[i + 1])) break;
        } else {
            whole = whole * 10 + (text[i] - '0');
        }
        ++i;
    }
    std::int64_t cents = whole * 100;
    if (i + 1 < n && text[i] == '.' && is_digit(text[i + 1])) {
        ++i;
        int frac_digits = 0;
        std::int64_t frac = 0;
        int round_digit = -1;
        while (i < n && is_digit(text[i])) {
            if (frac_digits < 2) {
                frac = frac * 10 + (text[i] - '0');
                ++frac_digits;
            } else if (round_digit < 0) {
                round_digit = text[i] - '0';
            }
            ++i;
        }
        if (frac_digits == 1) frac *= 10;
        if (round_digit >= 5) ++frac;
        cents += frac;
    }
    return neg ? -cents : cents;
}

}  // namespace uma
