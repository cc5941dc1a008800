#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace uma {

/// Exact decimal money: an integer count of cents. Ledger arithmetic never
/// touches floating point so sums are reproducible to the cent.
class Money {
public:
    constexpr Money() = default;

    static constexpr Money from_cents(std::int64_t cents) {
        Money m;
        m.cents_ = cents;
        return m;
    }

    constexpr std::int64_t cents() const { return cents_; }

    /// "50.00" — always two fractional digits, no thousands separators.
    std::string str() const;

    /// Accepts "50", "50.5", "50.00"; rejects anything else.
    static std::optional<Money> parse(std::string_view s);

    constexpr Money operator+(Money o) const { return from_cents(cents_ + o.cents_); }
    constexpr Money& operator+=(Money o) {
        cents_ += o.cents_;
        return *this;
    }
    auto operator<=>(const Money&) const = default;

private:
    std::int64_t cents_ = 0;
};

/// First decimal number appearing in free text, as cents; handles "$1,234.5",
/// a leading minus, and rounds half away from zero past two fractional
/// digits. Empty when no digit is found.
std::optional<std::int64_t> first_decimal_cents(std::string_view text);

}  // namespace uma
