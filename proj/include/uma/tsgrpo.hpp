#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "uma/trajectory.hpp"

namespace uma {

/// Rewards from nested sampling: N memory rollouts x M questions each.
struct RewardMatrix {
    int n_memory = 0;
    int n_questions = 0;
    std::vector<double> values;  // row-major, values[i * n_questions + j]

    static RewardMatrix zeros(int n, int m) {
        RewardMatrix r;
        r.n_memory = n;
        r.n_questions = m;
        r.values.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(m), 0.0);
        return r;
    }
    double& at(int i, int j) {
        return values[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_questions) +
                      static_cast<std::size_t>(j)];
    }
    double at(int i, int j) const {
        return values[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_questions) +
                      static_cast<std::size_t>(j)];
    }
};

struct ObjectiveConfig {
    double epsilon = 0.2;      // clip radius, in (0, 1)
    double beta = 0.001;       // KL penalty coefficient
    double lambda_tool = 0.1;  // tool-reward weight
    double sigma_floor = 1e-8;
    /// When set, the group reward for (i, j) also earns the memory
    /// trajectory's own lambda * r_tool as an additive signal.
    bool memory_tool_reward = false;
};

/// Fraction of trajectory steps that parsed and respected the phase
/// toolset. A trajectory with no steps scores 1.0 (nothing to penalize).
double tool_reward(const Trajectory& traj);

enum class OutcomeMode { Exact, Numeric, Judge };

/// Judge callback: returns 1 when the grader accepts `prediction` against
/// `truth`. Callers bind the question and provider into the closure.
using JudgeFn = std::function<int(const std::string& prediction, const std::string& truth)>;

struct OutcomeSpec {
    OutcomeMode mode = OutcomeMode::Numeric;
    JudgeFn judge;  // required for Judge mode
};

/// Terminal answer correctness in [0, 1]. Exact compares strings normalized
/// by lowercase/trim/whitespace-collapse/punctuation-strip; Numeric compares
/// the first parseable decimal in each string to the cent; Judge defers to
/// the callback.
double outcome_reward(const std::string& answer, const std::string& truth,
                      const OutcomeSpec& spec);

/// R = lambda_tool * r_tool + r_outcome for a QA trajectory.
double total_reward(const Trajectory& qa_traj, const std::string& truth,
                    const ObjectiveConfig& config, const OutcomeSpec& spec);

/// Memory-side advantages: row means z-scored against the group of N rows
/// (population sigma). Groups with sigma below the floor get all zeros.
std::vector<double> memory_advantages(const RewardMatrix& rewards, double sigma_floor = 1e-8);

/// QA-side advantages: each column z-scored independently, same floor rule.
RewardMatrix qa_advantages(const RewardMatrix& rewards, double sigma_floor = 1e-8);

/// Ablation variant: every reward z-scored in one flat group.
RewardMatrix global_group_advantages(const RewardMatrix& rewards, double sigma_floor = 1e-8);

struct AdvantageSet {
    std::vector<double> a_mem;  // length N
    RewardMatrix a_qa;          // N x M
    double sigma_floor = 1e-8;
};

AdvantageSet compute_advantages(const RewardMatrix& rewards, double sigma_floor = 1e-8);

/// Per-token surrogate terms for one trajectory: with rho = exp(lp_cur -
/// lp_ref), term = min(rho*A, clip(rho, 1-eps, 1+eps)*A) - beta*(rho -
/// log(rho) - 1). Throws LengthMismatch on unequal lists.
std::vector<double> objective_terms(const TokenLogprobs& logprobs, double advantage,
                                    const ObjectiveConfig& config);

/// Token log-probabilities of a trajectory, concatenated across steps.
/// Throws MissingLogprobs when any step lacks them.
TokenLogprobs gather_logprobs(const Trajectory& traj);

/// Logprob streams for a full nested group: memory[i] and qa[i][j].
struct GroupTrajectories {
    std::vector<TokenLogprobs> memory;
    std::vector<std::vector<TokenLogprobs>> qa;
};

struct ObjectiveBreakdown {
    double value = 0.0;
    std::vector<double> memory_sums;  // per-trajectory summed terms
    RewardMatrix qa_sums;
};

/// The full grouped objective: memory trajectory i carries its advantage on
/// every token, QA trajectory (i, j) likewise; term sums are combined as
/// (1/(N*M)) * sum_i sum_j (L_mem_i + L_qa_ij).
ObjectiveBreakdown stratified_objective(const GroupTrajectories& group,
                                        const RewardMatrix& rewards,
                                        const ObjectiveConfig& config);

/// One line of the training-batch export.
struct ExportRecord {
    std::string trajectory_id;
    std::string role;  // "memory" | "qa"
    double advantage = 0.0;
    std::optional<TokenLogprobs> tokens;
    std::optional<std::vector<double>> objective_terms;
};

void write_training_batch(std::ostream& out, const std::vector<ExportRecord>& records);

}  // namespace uma
