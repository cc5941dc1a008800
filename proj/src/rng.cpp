#include "uma/rng.hpp"

#include <numeric>
#include <unordered_map>

namespace uma {

std::vector<std::size_t> Rng::sample_distinct(std::size_t n, std::size_t k) {
    // Partial Fisher-Yates over a sparse index map; O(k) memory even for
    // wide ranges.
    std::unordered_map<std::size_t, std::size_t> moved;
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + static_cast<std::size_t>(below(n - i));
        std::size_t vj = moved.count(j) ? moved[j] : j;
        std::size_t vi = moved.count(i) ? moved[i] : i;
        out.push_back(vj);
        moved[j] = vi;
    }
    return out;
}

}  // namespace uma
