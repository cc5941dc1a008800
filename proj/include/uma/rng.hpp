#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "uma/text.hpp"

namespace uma {

/// Deterministic RNG. mt19937_64 raw output is specified by the standard,
/// and all bounded draws here avoid std::uniform_int_distribution (whose
/// sequence is implementation-defined), so streams are identical across
/// platforms and compilers.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    /// Unbiased draw in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t v = gen_();
        while (v >= limit) v = gen_();
        return v % n;
    }

    /// Inclusive range.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[static_cast<std::size_t>(below(v.size()))];
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// k distinct values from [0, n), in random order.
    std::vector<std::size_t> sample_distinct(std::size_t n, std::size_t k);

private:
    std::mt19937_64 gen_;
};

inline std::uint64_t derive_seed(std::uint64_t global_seed, std::uint64_t index) {
    return mix64(global_seed ^ mix64(index + 1));
}

}  // namespace uma
