#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "uma/driver.hpp"
#include "uma/episode.hpp"
#include "uma/ledger.hpp"
#include "uma/metrics.hpp"
#include "uma/tsgrpo.hpp"

namespace uma {

struct HarnessConfig {
    DriverConfig driver;
    OutcomeSpec outcome;  // drives the per-question accuracy field
    std::shared_ptr<const EmbeddingProvider> provider;
    ObjectiveConfig objective;
    std::string config_hash;
};

/// Scores one prediction: em/f1/rouge always, accuracy under the configured
/// outcome mode, judge verdict recorded when that mode is Judge.
QuestionScore score_question(std::string question_id, const QuestionRecord& record,
                             std::string prediction, const OutcomeSpec& outcome);

/// Full concatenated context in a single prompt per question, left-truncated
/// to the budget (the retained context is always a suffix). Transport
/// failures are recorded per question and the run continues.
MetricReport run_concat_baseline(const EpisodeSample& sample, Policy& policy,
                                 const HarnessConfig& config);

/// Hybrid retrieval baseline: per question, the top-20 fused chunks in
/// fused order ahead of the question.
MetricReport run_rag_baseline(const EpisodeSample& sample, Policy& policy,
                              const HarnessConfig& config);

struct UmaRunResult {
    MetricReport report;
    std::vector<Trajectory> maintenance;       // one per chunk
    std::vector<Trajectory> qa;                // one per question
    std::vector<TrajectoryRewards> qa_rewards; // parallel to qa
    MemoryBank final_bank;
};

/// The two-phase runner: maintenance over every chunk, then one QA loop per
/// question against the shared final memory.
UmaRunResult run_uma(const EpisodeSample& sample, Policy& policy, const HarnessConfig& config);

using PolicyFactory = std::function<std::unique_ptr<Policy>(int memory_rollout)>;

struct NestedRunResult {
    RewardMatrix rewards;  // N x M
    std::vector<std::vector<Trajectory>> maintenance;      // [i] -> per-chunk
    std::vector<std::vector<Trajectory>> qa;               // [i][j]
    std::vector<std::vector<TrajectoryRewards>> qa_rewards;
    std::vector<MemoryBank> banks;  // final memory per rollout
};

/// Nested sampling for training data: N independent maintenance rollouts,
/// each answering all M questions, yielding the N x M reward grid. With
/// config.objective.memory_tool_reward set, each row's rewards also include
/// lambda * r_tool of its own maintenance steps.
NestedRunResult run_uma_nested(const EpisodeSample& sample, const PolicyFactory& factory,
                               int n_memory, const HarnessConfig& config);

/// Scripted completions that extract every transaction into the bank during
/// maintenance and answer each question from an independent scan of the
/// ground-truth ledger. Used for offline end-to-end pipeline runs.
std::vector<std::string> perfect_extraction_script(const LedgerSample& sample);

/// The independent ledger scan behind the perfect script (exact cents).
std::string scripted_reference_answer(const std::vector<Transaction>& ledger,
                                      const LedgerQuestion& question);

}  // namespace uma
