// Independent test oracles. These deliberately re-derive results through a
// different structure than the library (no inverted index, no Money type,
// fresh scans) so agreement is meaningful.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace oracles {

// --- Okapi BM25, computed doc-by-doc with no index ------------------------

inline std::vector<double> bm25_scores(const std::vector<std::vector<std::string>>& docs,
                                       const std::vector<std::string>& query_terms,
                                       double k1 = 1.2, double b = 0.75) {
    const double n_docs = static_cast<double>(docs.size());
    double total_len = 0;
    for (const auto& d : docs) total_len += static_cast<double>(d.size());
    const double avg_len = total_len / n_docs;

    std::set<std::string> unique_terms(query_terms.begin(), query_terms.end());
    std::vector<double> scores(docs.size(), 0.0);
    for (const auto& term : unique_terms) {
        double df = 0;
        for (const auto& d : docs) {
            if (std::count(d.begin(), d.end(), term) > 0) df += 1;
        }
        if (df == 0) continue;
        const double idf = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
        for (std::size_t i = 0; i < docs.size(); ++i) {
            const double tf =
                static_cast<double>(std::count(docs[i].begin(), docs[i].end(), term));
            if (tf == 0) continue;
            const double denom =
                tf + k1 * (1.0 - b + b * static_cast<double>(docs[i].size()) / avg_len);
            scores[i] += idf * tf * (k1 + 1.0) / denom;
        }
    }
    return scores;
}

// --- z-scores, two-pass ----------------------------------------------------

inline std::vector<double> zscores(std::vector<double> values, double floor = 1e-8) {
    const double n = static_cast<double>(values.size());
    double mean = 0;
    for (double v : values) mean += v;
    mean /= n;
    double var = 0;
    for (double v : values) var += (v - mean) * (v - mean);
    const double sigma = std::sqrt(var / n);
    if (sigma < floor) return std::vector<double>(values.size(), 0.0);
    for (double& v : values) v = (v - mean) / sigma;
    return values;
}

// --- LCS length, full table ------------------------------------------------

inline int lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::vector<int>> table(a.size() + 1, std::vector<int>(b.size() + 1, 0));
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            table[i][j] = a[i - 1] == b[j - 1]
                              ? table[i - 1][j - 1] + 1
                              : std::max(table[i - 1][j], table[i][j - 1]);
        }
    }
    return table[a.size()][b.size()];
}

// --- Ledger brute force ----------------------------------------------------
// Plain-integer transaction view decoupled from the library types.

struct FlatTx {
    long day;  // day number
    std::string category;
    std::string scene;
    std::int64_t cents;
};

inline std::int64_t sum_categories_range(const std::vector<FlatTx>& ledger,
                                         const std::vector<std::string>& categories,
                                         long from_day, long to_day) {
    std::int64_t total = 0;
    for (const auto& t : ledger) {
        if (t.day < from_day || t.day > to_day) continue;
        for (const auto& c : categories) {
            if (t.category == c) {
                total += t.cents;
                break;
            }
        }
    }
    return total;
}

inline std::int64_t sum_all(const std::vector<FlatTx>& ledger) {
    std::int64_t total = 0;
    for (const auto& t : ledger) total += t.cents;
    return total;
}

inline std::optional<std::string> unique_max_category(const std::vector<FlatTx>& ledger) {
    std::map<std::string, std::int64_t> totals;
    for (const auto& t : ledger) totals[t.category] += t.cents;
    std::int64_t best = -1;
    std::string who;
    int count = 0;
    for (const auto& [cat, total] : totals) {
        if (total > best) {
            best = total;
            who = cat;
            count = 1;
        } else if (total == best) {
            ++count;
        }
    }
    if (count != 1) return std::nullopt;
    return who;
}

inline std::optional<long> unique_max_frequency_day(const std::vector<FlatTx>& ledger) {
    std::map<long, int> counts;
    for (const auto& t : ledger) ++counts[t.day];
    int best = -1;
    long who = 0;
    int ties = 0;
    for (const auto& [day, count] : counts) {
        if (count > best) {
            best = count;
            who = day;
            ties = 1;
        } else if (count == best) {
            ++ties;
        }
    }
    if (ties != 1) return std::nullopt;
    return who;
}

inline std::optional<std::int64_t> unique_max_amount(const std::vector<FlatTx>& ledger) {
    std::int64_t best = -1;
    int ties = 0;
    for (const auto& t : ledger) {
        if (t.cents > best) {
            best = t.cents;
            ties = 1;
        } else if (t.cents == best) {
            ++ties;
        }
    }
    if (ties != 1) return std::nullopt;
    return best;
}

inline std::int64_t sum_scene_on_day(const std::vector<FlatTx>& ledger,
                                     const std::string& scene, long day) {
    std::int64_t total = 0;
    for (const auto& t : ledger) {
        if (t.day == day && t.scene == scene) total += t.cents;
    }
    return total;
}

inline std::int64_t sum_category_on_day(const std::vector<FlatTx>& ledger,
                                        const std::string& category, long day) {
    std::int64_t total = 0;
    for (const auto& t : ledger) {
        if (t.day == day && t.category == category) total += t.cents;
    }
    return total;
}

inline std::string render_cents(std::int64_t cents) {
    std::string sign = cents < 0 ? "-" : "";
    if (cents < 0) cents = -cents;
    std::string frac = std::to_string(cents % 100);
    if (frac.size() < 2) frac = "0" + frac;
    return sign + std::to_string(cents / 100) + "." + frac;
}

}  // namespace oracles
