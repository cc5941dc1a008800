#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace uma {

/// Calendar date with exact civil-day arithmetic. Rendered as YYYY-MM-DD.
struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    auto operator<=>(const Date&) const = default;

    bool valid() const;
    std::string str() const;

    /// Days since 1970-01-01 (may be negative).
    long day_number() const;
    static Date from_day_number(long n);

    static std::optional<Date> parse(std::string_view s);
};

inline long days_between(const Date& a, const Date& b) {
    return b.day_number() - a.day_number();
}

}  // namespace uma
