#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "uma/date.hpp"
#include "uma/error.hpp"
#include "uma/money.hpp"
#include "uma/rng.hpp"
#include "uma/text.hpp"
#include "uma/tokens.hpp"

using namespace uma;

TEST_CASE("trim and lowercasing") {
    CHECK(trim("  hi \n") == "hi");
    CHECK(trim("") == "");
    CHECK(trim("   ") == "");
    CHECK(to_lower("MiXeD") == "mixed");
}

TEST_CASE("alnum tokenization") {
    CHECK(alnum_tokens("The cat, sat!") == std::vector<std::string>{"the", "cat", "sat"});
    CHECK(alnum_tokens("a1-b2") == std::vector<std::string>{"a1", "b2"});
    CHECK(alnum_tokens("...").empty());
}

TEST_CASE("answer normalization") {
    CHECK(normalize_answer("The  Paris!", true) == "paris");
    CHECK(normalize_answer("The  Paris!", false) == "the paris");
    CHECK(normalize_answer("An apple a day", true) == "apple day");
    CHECK(normalize_answer("", true) == "");
}

TEST_CASE("token counters") {
    auto unit = TokenCounter::unit();
    CHECK(unit.count("abcd") == 4);
    CHECK(unit.count("") == 0);

    auto words = TokenCounter::words();
    // ceil(2 * 1.3) = 3
    CHECK(words.count("two words") == 3);
    CHECK(words.count("") == 0);
    // ceil(10 * 1.3) = 13
    CHECK(words.count("a b c d e f g h i j") == 13);

    CHECK(TokenCounter::by_name("unit").name() == "unit");
    CHECK_THROWS_AS(TokenCounter::by_name("bogus"), ValidationError);
}

TEST_CASE("date round trip and arithmetic") {
    auto d = Date::parse("2024-02-29");
    REQUIRE(d.has_value());
    CHECK(d->str() == "2024-02-29");
    CHECK(Date::from_day_number(d->day_number()) == *d);
    CHECK_FALSE(Date::parse("2023-02-29").has_value());
    CHECK_FALSE(Date::parse("2024-13-01").has_value());
    CHECK_FALSE(Date::parse("2024-1-01").has_value());

    Date a{2024, 1, 1}, b{2024, 12, 31};
    CHECK(days_between(a, b) == 365);  // leap year
    CHECK(a < b);

    // Round trip across a wide span.
    for (long n = Date{2000, 1, 1}.day_number(); n < Date{2001, 1, 1}.day_number(); ++n) {
        CHECK(Date::from_day_number(n).day_number() == n);
    }
}

TEST_CASE("money parse and render") {
    CHECK(Money::from_cents(5000).str() == "50.00");
    CHECK(Money::from_cents(5).str() == "0.05");
    CHECK(Money::from_cents(-125).str() == "-1.25");
    CHECK(Money::parse("50.00")->cents() == 5000);
    CHECK(Money::parse("50.5")->cents() == 5050);
    CHECK(Money::parse("50")->cents() == 5000);
    CHECK_FALSE(Money::parse("50.005").has_value());
    CHECK_FALSE(Money::parse("x50").has_value());
    CHECK_FALSE(Money::parse("").has_value());
}

TEST_CASE("first decimal extraction") {
    CHECK(first_decimal_cents("The total is $50.00") == 5000);
    CHECK(first_decimal_cents("1,234.56 dollars") == 123456);
    CHECK(first_decimal_cents("around -3.5 degrees") == -350);
    CHECK(first_decimal_cents("3.14159 approx") == 314);   // rounds past two digits
    CHECK(first_decimal_cents("2.675") == 268);            // half rounds away from zero
    CHECK(first_decimal_cents("no numbers here") == std::nullopt);
    CHECK(first_decimal_cents("price: 7") == 700);
}

TEST_CASE("rng determinism and bounds") {
    Rng a(123), b(123);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());

    Rng r(7);
    for (int i = 0; i < 1000; ++i) {
        auto v = r.uniform_int(-3, 9);
        CHECK(v >= -3);
        CHECK(v <= 9);
    }

    auto picks = r.sample_distinct(10, 10);
    std::sort(picks.begin(), picks.end());
    for (std::size_t i = 0; i < 10; ++i) CHECK(picks[i] == i);

    auto few = r.sample_distinct(1000, 5);
    std::sort(few.begin(), few.end());
    CHECK(std::unique(few.begin(), few.end()) == few.end());

    CHECK(derive_seed(1, 2) != derive_seed(1, 3));
    CHECK(derive_seed(1, 2) == derive_seed(1, 2));
}

TEST_CASE("stable hashing") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") != fnv1a64("b"));
    CHECK(hex64(0).size() == 16);
    CHECK(hex64(0xdeadbeefULL) == "00000000deadbeef");
}

TEST_CASE("truncation marker") {
    CHECK(truncate_with_marker("short", 10) == "short");
    auto cut = truncate_with_marker(std::string(30, 'x'), 10);
    CHECK(cut.substr(0, 10) == std::string(10, 'x'));
    CHECK(cut.find("[truncated]") != std::string::npos);
}
