#include "uma/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "uma/error.hpp"
#include "uma/text.hpp"

namespace uma {

namespace {

constexpr const char* kConcatSystem =
    "Answer the question using the conversation history below. Reply with only the answer.";

constexpr const char* kRagSystem =
    "Answer the question using the retrieved passages below. Reply with only the answer.";

// Single-prompt baseline assembly: system + body + question, with the body
// left-truncated (suffix retained) to fit the budget.
std::string baseline_prompt(std::string_view system, std::string_view body,
                            std::string_view question, const PromptBudget& budget) {
    const std::string tail = "\n\nQuestion: " + std::string(question) + "\nAnswer:";
    auto render = [&](std::string_view b) {
        std::string out(system);
        if (!b.empty()) {
            out += "\n\n";
            out += b;
        }
        out += tail;
        return out;
    };
    if (budget.counter.count(render(body)) <= budget.max_tokens) return render(body);

    // Binary search the smallest left cut that fits; the empty body is the
    // fallback even if system+question alone still exceed the budget.
    std::size_t lo = 0, hi = body.size();
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (budget.counter.count(render(body.substr(mid))) <= budget.max_tokens) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    return render(body.substr(lo));
}

std::string question_id_for(const EpisodeSample& sample, std::size_t index) {
    return sample.sample_id + "/q-" + std::to_string(index);
}

}  // namespace

QuestionScore score_question(std::string question_id, const QuestionRecord& record,
                             std::string prediction, const OutcomeSpec& outcome) {
    QuestionScore score;
    score.question_id = std::move(question_id);
    score.question = record.question;
    score.truth = record.answer;
    score.prediction = std::move(prediction);
    score.metadata = record.metadata;
    score.em = exact_match(score.prediction, score.truth);
    score.f1 = token_f1(score.prediction, score.truth);
    score.rouge = rouge_l(score.prediction, score.truth);
    score.accuracy = outcome_reward(score.prediction, score.truth, outcome);
    if (outcome.mode == OutcomeMode::Judge) {
        score.judge = static_cast<int>(*score.accuracy);
    }
    return score;
}

MetricReport run_concat_baseline(const EpisodeSample& sample, Policy& policy,
                                 const HarnessConfig& config) {
    std::string context;
    for (std::size_t i = 0; i < sample.context.size(); ++i) {
        if (i > 0) context += "\n\n";
        context += sample.context[i];
    }

    MetricReport report;
    report.config_hash = config.config_hash;
    for (std::size_t qi = 0; qi < sample.questions.size(); ++qi) {
        const auto& record = sample.questions[qi];
        std::string prediction;
        bool failed = false;
        try {
            const std::string prompt =
                baseline_prompt(kConcatSystem, context, record.question, config.driver.budget);
            prediction = policy.complete(prompt, Phase::QA).text;
        } catch (const TransportError& e) {
            failed = true;
            prediction.clear();
        }
        auto score =
            score_question(question_id_for(sample, qi), record, std::move(prediction),
                           config.outcome);
        if (failed) score.metadata["transport_error"] = true;
        report.per_question.push_back(std::move(score));
    }
    report.recompute_aggregates();
    return report;
}

MetricReport run_rag_baseline(const EpisodeSample& sample, Policy& policy,
                              const HarnessConfig& config) {
    const auto chunks =
        ingest_stream(sample.context, Chunking{Chunking::Kind::BySession, 0},
                      config.driver.budget.counter);
    const auto retriever = HybridRetriever::build(chunks, config.provider);

    MetricReport report;
    report.config_hash = config.config_hash;
    for (std::size_t qi = 0; qi < sample.questions.size(); ++qi) {
        const auto& record = sample.questions[qi];
        std::string prediction;
        bool failed = false;
        try {
            const auto fused = retriever.fused(record.question, 20);
            std::string body;
            for (std::size_t r = 0; r < fused.size(); ++r) {
                if (r > 0) body += "\n\n";
                body += "[" + std::to_string(r + 1) + "] ";
                body += chunks[static_cast<std::size_t>(fused[r].chunk)].text;
            }
            const std::string prompt =
                baseline_prompt(kRagSystem, body, record.question, config.driver.budget);
            prediction = policy.complete(prompt, Phase::QA).text;
        } catch (const TransportError&) {
            failed = true;
            prediction.clear();
        } catch (const ProviderFailure&) {
            failed = true;
            prediction.clear();
        }
        auto score =
            score_question(question_id_for(sample, qi), record, std::move(prediction),
                           config.outcome);
        if (failed) score.metadata["transport_error"] = true;
        report.per_question.push_back(std::move(score));
    }
    report.recompute_aggregates();
    return report;
}

namespace {

struct EpisodeArtifacts {
    std::vector<Trajectory> maintenance;
    std::vector<Trajectory> qa;
    std::vector<TrajectoryRewards> qa_rewards;
    MemoryBank bank;
};

EpisodeArtifacts run_one_episode(const EpisodeSample& sample, Policy& policy,
                                 const HarnessConfig& config, const std::string& episode_id) {
    const auto chunks =
        ingest_stream(sample.context, Chunking{Chunking::Kind::BySession, 0},
                      config.driver.budget.counter);
    Episode episode(chunks);
    episode.enable_retrieval(config.provider);

    EpisodeArtifacts artifacts;
    while (episode.phase() == Phase::Maintenance) {
        artifacts.maintenance.push_back(
            run_maintenance(policy, episode, config.driver, episode_id));
    }
    for (std::size_t qi = 0; qi < sample.questions.size(); ++qi) {
        const auto& record = sample.questions[qi];
        Trajectory traj = run_qa(policy, episode, record.question, config.driver, episode_id,
                                 "q-" + std::to_string(qi));
        TrajectoryRewards rewards;
        rewards.r_tool = tool_reward(traj);
        rewards.r_outcome =
            outcome_reward(traj.terminal_answer.value_or(""), record.answer, config.outcome);
        rewards.total = config.objective.lambda_tool * rewards.r_tool + rewards.r_outcome;
        artifacts.qa.push_back(std::move(traj));
        artifacts.qa_rewards.push_back(rewards);
    }
    artifacts.bank = episode.bank();
    return artifacts;
}

}  // namespace

UmaRunResult run_uma(const EpisodeSample& sample, Policy& policy, const HarnessConfig& config) {
    auto artifacts = run_one_episode(sample, policy, config, sample.sample_id);

    UmaRunResult result;
    result.report.config_hash = config.config_hash;
    for (std::size_t qi = 0; qi < sample.questions.size(); ++qi) {
        result.report.per_question.push_back(
            score_question(question_id_for(sample, qi), sample.questions[qi],
                           artifacts.qa[qi].terminal_answer.value_or(""), config.outcome));
    }
    result.report.recompute_aggregates();
    result.maintenance = std::move(artifacts.maintenance);
    result.qa = std::move(artifacts.qa);
    result.qa_rewards = std::move(artifacts.qa_rewards);
    result.final_bank = std::move(artifacts.bank);
    return result;
}

NestedRunResult run_uma_nested(const EpisodeSample& sample, const PolicyFactory& factory,
                               int n_memory, const HarnessConfig& config) {
    if (n_memory <= 0) throw ValidationError("n_memory must be positive");
    const int m = static_cast<int>(sample.questions.size());
    if (m == 0) throw ValidationError("nested sampling requires at least one question");

    NestedRunResult result;
    result.rewards = RewardMatrix::zeros(n_memory, m);
    for (int i = 0; i < n_memory; ++i) {
        auto policy = factory(i);
        const std::string episode_id = sample.sample_id + "/m-" + std::to_string(i);
        auto artifacts = run_one_episode(sample, *policy, config, episode_id);

        double memory_bonus = 0.0;
        if (config.objective.memory_tool_reward) {
            // r_tool over the whole maintenance rollout, all chunks pooled.
            Trajectory pooled;
            for (const auto& t : artifacts.maintenance) {
                pooled.steps.insert(pooled.steps.end(), t.steps.begin(), t.steps.end());
            }
            memory_bonus = config.objective.lambda_tool * tool_reward(pooled);
        }
        for (int j = 0; j < m; ++j) {
            result.rewards.at(i, j) =
                artifacts.qa_rewards[static_cast<std::size_t>(j)].total + memory_bonus;
        }
        result.maintenance.push_back(std::move(artifacts.maintenance));
        result.qa.push_back(std::move(artifacts.qa));
        result.qa_rewards.push_back(std::move(artifacts.qa_rewards));
        result.banks.push_back(std::move(artifacts.bank));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Perfect-extraction script
// ---------------------------------------------------------------------------

namespace {

std::string tx_key(std::size_t ledger_index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "txn-%04zu", ledger_index + 1);
    return buf;
}

std::string tx_value(const Transaction& t) {
    return t.date.str() + " | " + t.category + " / " + t.scene + " | $" + t.amount.str();
}

// First ledger index a question's slice touches, for the retrieve step.
std::optional<std::size_t> anchor_index(const std::vector<Transaction>& ledger,
                                        const LedgerQuestion& q) {
    auto in_categories = [&](const Transaction& t) {
        return std::find(q.params.categories.begin(), q.params.categories.end(), t.category) !=
               q.params.categories.end();
    };
    auto in_range = [&](const Transaction& t) {
        if (q.params.from && t.date < *q.params.from) return false;
        if (q.params.to && *q.params.to < t.date) return false;
        return true;
    };
    switch (q.tmpl) {
        case QuestionTemplate::TimeRangeSceneAmount:
        case QuestionTemplate::TimeRangeMultiScene:
            for (std::size_t i = 0; i < ledger.size(); ++i) {
                if (in_range(ledger[i]) && in_categories(ledger[i])) return i;
            }
            return std::nullopt;
        case QuestionTemplate::GlobalTotal:
            return ledger.empty() ? std::nullopt : std::optional<std::size_t>(0);
        case QuestionTemplate::MaxScene: {
            std::map<std::string, Money> totals;
            for (const auto& t : ledger) totals[t.category] += t.amount;
            std::string best;
            Money best_total;
            for (const auto& [cat, total] : totals) {
                if (best.empty() || best_total < total) {
                    best = cat;
                    best_total = total;
                }
            }
            for (std::size_t i = 0; i < ledger.size(); ++i) {
                if (ledger[i].category == best) return i;
            }
            return std::nullopt;
        }
        case QuestionTemplate::MaxFrequencyDate: {
            std::map<Date, int> counts;
            for (const auto& t : ledger) ++counts[t.date];
            Date best{};
            int best_count = -1;
            for (const auto& [date, count] : counts) {
                if (count > best_count) {
                    best = date;
                    best_count = count;
                }
            }
            for (std::size_t i = 0; i < ledger.size(); ++i) {
                if (ledger[i].date == best) return i;
            }
            return std::nullopt;
        }
        case QuestionTemplate::MaxSingleAmount: {
            std::size_t best = 0;
            for (std::size_t i = 1; i < ledger.size(); ++i) {
                if (ledger[best].amount < ledger[i].amount) best = i;
            }
            return ledger.empty() ? std::nullopt : std::optional<std::size_t>(best);
        }
        case QuestionTemplate::PointQuery:
            for (std::size_t i = 0; i < ledger.size(); ++i) {
                if (q.params.date && ledger[i].date == *q.params.date &&
                    ledger[i].scene == q.params.scene) {
                    return i;
                }
            }
            return std::nullopt;
        case QuestionTemplate::SingleDateSceneAmount:
            for (std::size_t i = 0; i < ledger.size(); ++i) {
                if (q.params.date && ledger[i].date == *q.params.date &&
                    in_categories(ledger[i])) {
                    return i;
                }
            }
            return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace

std::string scripted_reference_answer(const std::vector<Transaction>& ledger,
                                      const LedgerQuestion& q) {
    // Deliberately a fresh scan, not a call into the generator's oracle:
    // agreement between the two routes is what the offline episode checks.
    auto in_categories = [&](const Transaction& t) {
        return std::find(q.params.categories.begin(), q.params.categories.end(), t.category) !=
               q.params.categories.end();
    };
    auto in_range = [&](const Transaction& t) {
        if (q.params.from && t.date < *q.params.from) return false;
        if (q.params.to && *q.params.to < t.date) return false;
        return true;
    };
    switch (q.tmpl) {
        case QuestionTemplate::TimeRangeSceneAmount:
        case QuestionTemplate::TimeRangeMultiScene: {
            std::int64_t cents = 0;
            for (const auto& t : ledger) {
                if (in_range(t) && in_categories(t)) cents += t.amount.cents();
            }
            return Money::from_cents(cents).str();
        }
        case QuestionTemplate::GlobalTotal: {
            std::int64_t cents = 0;
            for (const auto& t : ledger) cents += t.amount.cents();
            return Money::from_cents(cents).str();
        }
        case QuestionTemplate::MaxScene: {
            std::map<std::string, std::int64_t> totals;
            for (const auto& t : ledger) totals[t.category] += t.amount.cents();
            std::string best;
            std::int64_t best_total = -1;
            for (const auto& [cat, total] : totals) {
                if (total > best_total) {
                    best = cat;
                    best_total = total;
                }
            }
            return best;
        }
        case QuestionTemplate::MaxFrequencyDate: {
            std::map<Date, int> counts;
            for (const auto& t : ledger) ++counts[t.date];
            Date best{};
            int best_count = -1;
            for (const auto& [date, count] : counts) {
                if (count > best_count) {
                    best = date;
                    best_count = count;
                }
            }
            return best.str();
        }
        case QuestionTemplate::MaxSingleAmount: {
            std::int64_t best = 0;
            for (const auto& t : ledger) best = std::max(best, t.amount.cents());
            return Money::from_cents(best).str();
        }
        case QuestionTemplate::PointQuery: {
            std::int64_t cents = 0;
            for (const auto& t : ledger) {
                if (q.params.date && t.date == *q.params.date && t.scene == q.params.scene) {
                    cents += t.amount.cents();
                }
            }
            return Money::from_cents(cents).str();
        }
        case QuestionTemplate::SingleDateSceneAmount: {
            std::int64_t cents = 0;
            for (const auto& t : ledger) {
                if (q.params.date && t.date == *q.params.date && in_categories(t)) {
                    cents += t.amount.cents();
                }
            }
            return Money::from_cents(cents).str();
        }
    }
    return "";
}

std::vector<std::string> perfect_extraction_script(const LedgerSample& sample) {
    std::vector<std::string> script;

    // Phase I: store each transaction (grouped by session date; session
    // dates are unique within a sample), then commit the core.
    std::size_t recorded = 0;
    for (std::size_t si = 0; si < sample.sessions.size(); ++si) {
        const Date date = sample.sessions[si].date;
        for (std::size_t li = 0; li < sample.ledger.size(); ++li) {
            if (!(sample.ledger[li].date == date)) continue;
            ToolCall call;
            call.tool = Tool::Add;
            call.args = AddArgs{tx_key(li), tx_value(sample.ledger[li])};
            script.push_back(render_call(call));
            ++recorded;
        }
        ToolCall commit;
        commit.tool = Tool::UpdateCore;
        commit.args = UpdateCoreArgs{"Sessions processed: " + std::to_string(si + 1) +
                                     "; transactions recorded: " + std::to_string(recorded) +
                                     "; through " + date.str() + "."};
        script.push_back(render_call(commit));
    }

    // Phase II: look up one supporting entry, then answer from an
    // independent scan of the ledger.
    for (const auto& q : sample.questions) {
        const auto anchor = anchor_index(sample.ledger, q);
        ToolCall lookup;
        if (anchor) {
            lookup.tool = Tool::Retrieve;
            lookup.args = RetrieveArgs{tx_key(*anchor)};
        } else {
            lookup.tool = Tool::List;
            lookup.args = ListArgs{};
        }
        script.push_back(render_call(lookup));

        ToolCall answer;
        answer.tool = Tool::Answer;
        answer.args = AnswerArgs{scripted_reference_answer(sample.ledger, q)};
        script.push_back(render_call(answer));
    }
    return script;
}

}  // namespace uma
