#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace uma {

/// 1 iff the strings agree after lowercasing, punctuation stripping,
/// whitespace collapsing, and dropping the English articles a/an/the.
int exact_match(std::string_view prediction, std::string_view truth);

/// Bag-of-tokens F1 over normalized tokens (articles retained). 1 when both
/// sides normalize to empty; 0 when exactly one does.
double token_f1(std::string_view prediction, std::string_view truth);

/// LCS-based F-measure over normalized tokens, precision and recall equally
/// weighted. Same empty-string conventions as token_f1.
double rouge_l(std::string_view prediction, std::string_view truth);

struct QuestionScore {
    std::string question_id;
    int em = 0;
    double f1 = 0.0;
    double rouge = 0.0;
    std::optional<int> judge;
    /// Outcome correctness under the run's configured scoring mode.
    std::optional<double> accuracy;
    std::string question;
    std::string truth;
    std::string prediction;
    nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
};

struct MetricReport {
    std::vector<QuestionScore> per_question;
    double em_mean = 0.0;
    double f1_mean = 0.0;
    double rouge_mean = 0.0;
    std::optional<double> judge_mean;
    std::optional<double> accuracy_mean;
    std::string config_hash;

    void recompute_aggregates();

    /// Line-delimited per-question records followed by one aggregate record.
    void write_jsonl(std::ostream& out) const;
    static MetricReport read_jsonl(std::istream& in);

    /// Small human-readable metric table.
    std::string summary_table(std::string_view method) const;
};

}  // namespace uma
