#include "uma/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "uma/error.hpp"
#include "uma/text.hpp"

namespace uma {

namespace {

std::vector<std::string> metric_tokens(std::string_view s) {
    // Lowercase + punctuation-stripped, articles retained: F1 and ROUGE-L
    // count every token, unlike exact match.
    return alnum_tokens(normalize_answer(s, /*drop_articles=*/false));
}

}  // namespace

int exact_match(std::string_view prediction, std::string_view truth) {
    return normalize_answer(prediction, /*drop_articles=*/true) ==
                   normalize_answer(truth, /*drop_articles=*/true)
               ? 1
               : 0;
}

double token_f1(std::string_view prediction, std::string_view truth) {
    const auto p = metric_tokens(prediction);
    const auto t = metric_tokens(truth);
    if (p.empty() && t.empty()) return 1.0;
    if (p.empty() || t.empty()) return 0.0;

    std::map<std::string, int> counts;
    for (const auto& tok : t) ++counts[tok];
    int overlap = 0;
    for (const auto& tok : p) {
        auto it = counts.find(tok);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) return 0.0;
    const double precision = static_cast<double>(overlap) / static_cast<double>(p.size());
    const double recall = static_cast<double>(overlap) / static_cast<double>(t.size());
    return 2.0 * precision * recall / (precision + recall);
}

double rouge_l(std::string_view prediction, std::string_view truth) {
    const auto p = metric_tokens(prediction);
    const auto t = metric_tokens(truth);
    if (p.empty() && t.empty()) return 1.0;
    if (p.empty() || t.empty()) return 0.0;

    // Classic LCS table, rolling rows.
    std::vector<int> prev(t.size() + 1, 0), cur(t.size() + 1, 0);
    for (std::size_t i = 1; i <= p.size(); ++i) {
        for (std::size_t j = 1; j <= t.size(); ++j) {
            if (p[i - 1] == t[j - 1]) {
                cur[j] = prev[j - 1] + 1;
            } else {
                cur[j] = std::max(prev[j], cur[j - 1]);
            }
        }
        std::swap(prev, cur);
    }
    const int lcs = prev[t.size()];
    if (lcs == 0) return 0.0;
    const double precision = static_cast<double>(lcs) / static_cast<double>(p.size());
    const double recall = static_cast<double>(lcs) / static_cast<double>(t.size());
    return 2.0 * precision * recall / (precision + recall);
}

void MetricReport::recompute_aggregates() {
    em_mean = f1_mean = rouge_mean = 0.0;
    judge_mean.reset();
    accuracy_mean.reset();
    if (per_question.empty()) return;

    double em = 0.0, f1 = 0.0, rouge = 0.0, judge = 0.0, accuracy = 0.0;
    std::size_t judged = 0, scored = 0;
    for (const auto& q : per_question) {
        em += q.em;
        f1 += q.f1;
        rouge += q.rouge;
        if (q.judge) {
            judge += *q.judge;
            ++judged;
        }
        if (q.accuracy) {
            accuracy += *q.accuracy;
            ++scored;
        }
    }
    const double n = static_cast<double>(per_question.size());
    em_mean = em / n;
    f1_mean = f1 / n;
    rouge_mean = rouge / n;
    if (judged == per_question.size()) judge_mean = judge / n;
    if (scored == per_question.size()) accuracy_mean = accuracy / n;
}

void MetricReport::write_jsonl(std::ostream& out) const {
    for (const auto& q : per_question) {
        nlohmann::ordered_json j;
        j["record"] = "question";
        j["question_id"] = q.question_id;
        j["em"] = q.em;
        j["f1"] = q.f1;
        j["rouge_l"] = q.rouge;
        if (q.judge) j["judge"] = *q.judge;
        if (q.accuracy) j["accuracy"] = *q.accuracy;
        j["question"] = q.question;
        j["truth"] = q.truth;
        j["prediction"] = q.prediction;
        if (!q.metadata.empty()) j["metadata"] = q.metadata;
        out << j.dump() << "\n";
    }
    nlohmann::ordered_json agg;
    agg["record"] = "aggregate";
    agg["count"] = per_question.size();
    agg["em"] = em_mean;
    agg["f1"] = f1_mean;
    agg["rouge_l"] = rouge_mean;
    if (judge_mean) agg["judge"] = *judge_mean;
    if (accuracy_mean) agg["accuracy"] = *accuracy_mean;
    agg["config_hash"] = config_hash;
    out << agg.dump() << "\n";
}

MetricReport MetricReport::read_jsonl(std::istream& in) {
    MetricReport report;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto j = nlohmann::ordered_json::parse(line, nullptr, false);
        if (j.is_discarded()) throw ValidationError("report line is not valid JSON");
        if (j.value("record", "") == "question") {
            QuestionScore q;
            q.question_id = j.value("question_id", "");
            q.em = j.value("em", 0);
            q.f1 = j.value("f1", 0.0);
            q.rouge = j.value("rouge_l", 0.0);
            if (j.contains("judge")) q.judge = j["judge"].get<int>();
            if (j.contains("accuracy")) q.accuracy = j["accuracy"].get<double>();
            q.question = j.value("question", "");
            q.truth = j.value("truth", "");
            q.prediction = j.value("prediction", "");
            if (j.contains("metadata")) q.metadata = j["metadata"];
            report.per_question.push_back(std::move(q));
        } else if (j.value("record", "") == "aggregate") {
            report.config_hash = j.value("config_hash", "");
        }
    }
    report.recompute_aggregates();
    return report;
}

std::string MetricReport::summary_table(std::string_view method) const {
    std::ostringstream out;
    out << "method        em      f1      rouge_l";
    if (judge_mean) out << "  judge";
    if (accuracy_mean) out << "  accuracy";
    out << "\n";
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-12s %-7.4f %-7.4f %-7.4f", std::string(method).c_str(),
                  em_mean, f1_mean, rouge_mean);
    out << buf;
    if (judge_mean) {
        std::snprintf(buf, sizeof(buf), "  %-5.4f", *judge_mean);
        out << buf;
    }
    if (accuracy_mean) {
        std::snprintf(buf, sizeof(buf), "  %-7.4f", *accuracy_mean);
        out << buf;
    }
    out << "\n";
    return out.str();
}

}  // namespace uma
