#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace uma {

std::string to_lower(std::string_view s);

/// Strips leading/trailing ASCII whitespace.
std::string_view trim(std::string_view s);

/// Lowercased alphanumeric runs; everything else is a separator.
std::vector<std::string> alnum_tokens(std::string_view s);

std::size_t word_count(std::string_view s);

/// Lowercase + strip punctuation + collapse whitespace. Optionally drops
/// the English articles "a", "an", "the" as whole tokens.
std::string normalize_answer(std::string_view s, bool drop_articles);

/// Caps `s` at `max_chars` characters, appending a marker when cut.
std::string truncate_with_marker(std::string_view s, std::size_t max_chars);

/// FNV-1a, the stable 64-bit flavor. Used for content hashes and
/// embedding buckets; must not change across platforms.
std::uint64_t fnv1a64(std::string_view s);

std::string hex64(std::uint64_t v);

/// splitmix64 finalizer; used to derive per-sample seeds from a global one.
std::uint64_t mix64(std::uint64_t x);

}  // namespace uma
