#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <string>
#include <vector>

#include "uma/memory_bank.hpp"
#include "uma/rng.hpp"

using namespace uma;

TEST_CASE("add semantics") {
    MemoryBank bank;
    auto ok = bank.add("budget", "$50");
    CHECK(ok.ok);
    CHECK(ok.message == "Success");
    CHECK(bank.size() == 1);

    auto dup = bank.add("budget", "x");
    CHECK_FALSE(dup.ok);
    CHECK(dup.error == ToolError::DuplicateKey);
    CHECK_FALSE(dup.payload.has_value());
    CHECK(bank.retrieve("budget").payload == "$50");  // unchanged

    auto blank = bank.add("  ", "x");
    CHECK_FALSE(blank.ok);
    CHECK(blank.error == ToolError::EmptyKey);
    CHECK(bank.size() == 1);
}

TEST_CASE("update semantics") {
    MemoryBank bank;
    CHECK_FALSE(bank.update("budget", "x").ok);
    CHECK(bank.update("budget", "x").error == ToolError::KeyNotFound);

    bank.add("budget", "$50");
    CHECK(bank.update("budget", "$60").ok);
    CHECK(bank.retrieve("budget").payload == "$60");  // read-your-write

    // order position unchanged on update
    bank.add("second", "2");
    bank.update("budget", "$70");
    CHECK(bank.list_keys().key_list == std::vector<std::string>{"budget", "second"});
}

TEST_CASE("delete semantics") {
    MemoryBank bank;
    bank.add("budget", "$50");
    CHECK(bank.erase("budget").ok);
    CHECK(bank.size() == 0);
    CHECK(bank.erase("budget").error == ToolError::KeyNotFound);

    // key reusable after deletion
    CHECK(bank.add("budget", "again").ok);
    CHECK(bank.retrieve("budget").payload == "again");
}

TEST_CASE("retrieve is pure") {
    MemoryBank bank;
    bank.add("k", "v");
    bank.set_core("core text");
    const std::string before = bank.snapshot();
    bank.retrieve("k");
    bank.retrieve("missing");
    bank.list_keys();
    CHECK(bank.snapshot() == before);
}

TEST_CASE("list reports insertion order") {
    MemoryBank bank;
    CHECK(bank.list_keys().ok);
    CHECK(bank.list_keys().key_list->empty());

    bank.add("a", "1");
    bank.add("b", "2");
    CHECK(bank.list_keys().key_list == std::vector<std::string>{"a", "b"});

    bank.erase("a");
    bank.add("c", "3");
    CHECK(bank.list_keys().key_list == std::vector<std::string>{"b", "c"});
}

TEST_CASE("core replacement is independent of entries") {
    MemoryBank bank;
    bank.add("k", "v");
    const auto entries_before = bank.to_json()["entries"].dump();

    bank.set_core("day 1 summary");
    CHECK(bank.core() == "day 1 summary");
    bank.set_core("day 2 summary");
    CHECK(bank.core() == "day 2 summary");  // last write wins
    CHECK(bank.to_json()["entries"].dump() == entries_before);
}

TEST_CASE("keys trimmed, case-sensitive") {
    MemoryBank bank;
    CHECK(bank.add("  budget  ", "x").ok);
    CHECK(bank.retrieve("budget").ok);
    CHECK(bank.list_keys().key_list == std::vector<std::string>{"budget"});
    CHECK_FALSE(bank.add("budget", "y").ok);
    CHECK(bank.add("Budget", "z").ok);  // different case is a different key
}

TEST_CASE("value size cap") {
    MemoryBank bank;
    const std::string big(MemoryBank::kMaxValueChars + 1, 'x');
    CHECK(bank.add("k", big).error == ToolError::ValueTooLarge);
    CHECK(bank.size() == 0);
    CHECK(bank.add("k", std::string(MemoryBank::kMaxValueChars, 'x')).ok);
    CHECK(bank.update("k", big).error == ToolError::ValueTooLarge);
}

TEST_CASE("snapshot round trip") {
    MemoryBank bank;
    bank.add("a", "1");
    bank.add("b", "two\nlines");
    bank.set_core("summary");
    auto restored = MemoryBank::from_snapshot(bank.snapshot());
    CHECK(restored.snapshot() == bank.snapshot());
    CHECK(restored.core() == "summary");
    CHECK(restored.list_keys().key_list == std::vector<std::string>{"a", "b"});
}

namespace {

// Reference model: a plain ordered vector, no index, no trimming shortcuts.
struct ReferenceBank {
    std::vector<std::pair<std::string, std::string>> entries;

    static std::string trimmed(const std::string& s) {
        std::size_t b = s.find_first_not_of(" \t\n\r\f\v");
        if (b == std::string::npos) return "";
        std::size_t e = s.find_last_not_of(" \t\n\r\f\v");
        return s.substr(b, e - b + 1);
    }
    int find(const std::string& key) const {
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (entries[i].first == key) return static_cast<int>(i);
        }
        return -1;
    }
    bool add(const std::string& key, const std::string& value) {
        const std::string k = trimmed(key);
        if (k.empty() || value.size() > 8192 || find(k) >= 0) return false;
        entries.emplace_back(k, value);
        return true;
    }
    bool update(const std::string& key, const std::string& value) {
        if (value.size() > 8192) return false;
        int i = find(trimmed(key));
        if (i < 0) return false;
        entries[static_cast<std::size_t>(i)].second = value;
        return true;
    }
    bool erase(const std::string& key) {
        int i = find(trimmed(key));
        if (i < 0) return false;
        entries.erase(entries.begin() + i);
        return true;
    }
};

}  // namespace

TEST_CASE("replay oracle on random operation logs") {
    Rng rng(2024);
    const std::vector<std::string> keys = {"a", "b", "c", " d ", "e", "F"};
    for (int trial = 0; trial < 200; ++trial) {
        MemoryBank bank;
        ReferenceBank ref;
        const int ops = static_cast<int>(rng.uniform_int(1, 40));
        for (int i = 0; i < ops; ++i) {
            const auto& key = rng.pick(keys);
            const std::string value = "v" + std::to_string(rng.uniform_int(0, 9));
            switch (rng.uniform_int(0, 2)) {
                case 0:
                    CHECK(bank.add(key, value).ok == ref.add(key, value));
                    break;
                case 1:
                    CHECK(bank.update(key, value).ok == ref.update(key, value));
                    break;
                default:
                    CHECK(bank.erase(key).ok == ref.erase(key));
                    break;
            }
        }
        REQUIRE(bank.size() == ref.entries.size());
        for (std::size_t i = 0; i < ref.entries.size(); ++i) {
            CHECK(bank.entries()[i].key == ref.entries[i].first);
            CHECK(bank.entries()[i].value == ref.entries[i].second);
        }
    }
}

TEST_CASE("add-delete-add and add-add properties") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const std::string key = "k" + std::to_string(rng.uniform_int(0, 1000));
        MemoryBank bank;
        CHECK(bank.add(key, "1").ok);
        CHECK_FALSE(bank.add(key, "2").ok);  // second add always fails
        CHECK(bank.erase(key).ok);
        CHECK(bank.add(key, "3").ok);  // delete frees the key
    }
}
