#include "uma/tsgrpo.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "uma/error.hpp"
#include "uma/money.hpp"
#include "uma/text.hpp"

namespace uma {

double tool_reward(const Trajectory& traj) {
    if (traj.steps.empty()) return 1.0;
    return static_cast<double>(count_valid_steps(traj)) /
           static_cast<double>(traj.steps.size());
}

double outcome_reward(const std::string& answer, const std::string& truth,
                      const OutcomeSpec& spec) {
    switch (spec.mode) {
        case OutcomeMode::Exact:
            return normalize_answer(answer, /*drop_articles=*/false) ==
                           normalize_answer(truth, /*drop_articles=*/false)
                       ? 1.0
                       : 0.0;
        case OutcomeMode::Numeric: {
            const auto a = first_decimal_cents(answer);
            const auto t = first_decimal_cents(truth);
            return a && t && *a == *t ? 1.0 : 0.0;
        }
        case OutcomeMode::Judge:
            if (!spec.judge) throw JudgeUnavailable("judge mode selected without a judge");
            return spec.judge(answer, truth) ? 1.0 : 0.0;
    }
    return 0.0;
}

double total_reward(const Trajectory& qa_traj, const std::string& truth,
                    const ObjectiveConfig& config, const OutcomeSpec& spec) {
    const std::string answer = qa_traj.terminal_answer.value_or("");
    return config.lambda_tool * tool_reward(qa_traj) + outcome_reward(answer, truth, spec);
}

namespace {

// Z-scores `group` in place with population sigma; all zeros when sigma is
// below the floor.
void zscore(std::vector<double>& group, double sigma_floor) {
    const double n = static_cast<double>(group.size());
    double mean = 0.0;
    for (double v : group) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : group) var += (v - mean) * (v - mean);
    const double sigma = std::sqrt(var / n);
    if (sigma < sigma_floor) {
        std::fill(group.begin(), group.end(), 0.0);
        return;
    }
    for (double& v : group) v = (v - mean) / sigma;
}

}  // namespace

std::vector<double> memory_advantages(const RewardMatrix& rewards, double sigma_floor) {
    std::vector<double> returns(static_cast<std::size_t>(rewards.n_memory), 0.0);
    for (int i = 0; i < rewards.n_memory; ++i) {
        double sum = 0.0;
        for (int j = 0; j < rewards.n_questions; ++j) sum += rewards.at(i, j);
        returns[static_cast<std::size_t>(i)] = sum / static_cast<double>(rewards.n_questions);
    }
    zscore(returns, sigma_floor);
    return returns;
}

RewardMatrix qa_advantages(const RewardMatrix& rewards, double sigma_floor) {
    RewardMatrix out = RewardMatrix::zeros(rewards.n_memory, rewards.n_questions);
    std::vector<double> column(static_cast<std::size_t>(rewards.n_memory));
    for (int j = 0; j < rewards.n_questions; ++j) {
        for (int i = 0; i < rewards.n_memory; ++i) {
            column[static_cast<std::size_t>(i)] = rewards.at(i, j);
        }
        zscore(column, sigma_floor);
        for (int i = 0; i < rewards.n_memory; ++i) {
            out.at(i, j) = column[static_cast<std::size_t>(i)];
        }
    }
    return out;
}

RewardMatrix global_group_advantages(const RewardMatrix& rewards, double sigma_floor) {
    RewardMatrix out = rewards;
    zscore(out.values, sigma_floor);
    return out;
}

AdvantageSet compute_advantages(const RewardMatrix& rewards, double sigma_floor) {
    AdvantageSet set;
    set.sigma_floor = sigma_floor;
    set.a_mem = memory_advantages(rewards, sigma_floor);
    set.a_qa = qa_advantages(rewards, sigma_floor);
    return set;
}

std::vector<double> objective_terms(const TokenLogprobs& logprobs, double advantage,
                                    const ObjectiveConfig& config) {
    if (logprobs.current.size() != logprobs.reference.size()) {
        throw LengthMismatch("current/reference logprob lists differ in length");
    }
    std::vector<double> terms;
    terms.reserve(logprobs.current.size());
    for (std::size_t t = 0; t < logprobs.current.size(); ++t) {
        const double rho = std::exp(logprobs.current[t] - logprobs.reference[t]);
        const double clipped =
            std::clamp(rho, 1.0 - config.epsilon, 1.0 + config.epsilon);
        const double surrogate = std::min(rho * advantage, clipped * advantage);
        const double kl = rho - std::log(rho) - 1.0;
        terms.push_back(surrogate - config.beta * kl);
    }
    return terms;
}

TokenLogprobs gather_logprobs(const Trajectory& traj) {
    TokenLogprobs out;
    for (const auto& step : traj.steps) {
        if (!step.logprobs) {
            throw MissingLogprobs("trajectory " + traj.episode_id + "/" + traj.unit_id +
                                  " has a step without logprobs");
        }
        out.current.insert(out.current.end(), step.logprobs->current.begin(),
                           step.logprobs->current.end());
        out.reference.insert(out.reference.end(), step.logprobs->reference.begin(),
                             step.logprobs->reference.end());
    }
    return out;
}

ObjectiveBreakdown stratified_objective(const GroupTrajectories& group,
                                        const RewardMatrix& rewards,
                                        const ObjectiveConfig& config) {
    const int n = rewards.n_memory;
    const int m = rewards.n_questions;
    if (static_cast<int>(group.memory.size()) != n) {
        throw MissingLogprobs("expected " + std::to_string(n) + " memory trajectories, got " +
                              std::to_string(group.memory.size()));
    }
    if (static_cast<int>(group.qa.size()) != n) {
        throw MissingLogprobs("QA trajectory grid has wrong row count");
    }
    for (const auto& row : group.qa) {
        if (static_cast<int>(row.size()) != m) {
            throw MissingLogprobs("QA trajectory grid has wrong column count");
        }
    }

    const auto a_mem = memory_advantages(rewards, config.sigma_floor);
    const auto a_qa = qa_advantages(rewards, config.sigma_floor);

    ObjectiveBreakdown breakdown;
    breakdown.memory_sums.resize(static_cast<std::size_t>(n), 0.0);
    breakdown.qa_sums = RewardMatrix::zeros(n, m);

    for (int i = 0; i < n; ++i) {
        const auto terms = objective_terms(group.memory[static_cast<std::size_t>(i)],
                                           a_mem[static_cast<std::size_t>(i)], config);
        double sum = 0.0;
        for (double t : terms) sum += t;
        breakdown.memory_sums[static_cast<std::size_t>(i)] = sum;
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            const auto terms = objective_terms(
                group.qa[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
                a_qa.at(i, j), config);
            double sum = 0.0;
            for (double t : terms) sum += t;
            breakdown.qa_sums.at(i, j) = sum;
        }
    }

    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            total += breakdown.memory_sums[static_cast<std::size_t>(i)] +
                     breakdown.qa_sums.at(i, j);
        }
    }
    breakdown.value = total / (static_cast<double>(n) * static_cast<double>(m));
    return breakdown;
}

void write_training_batch(std::ostream& out, const std::vector<ExportRecord>& records) {
    for (const auto& rec : records) {
        nlohmann::ordered_json j;
        j["trajectory_id"] = rec.trajectory_id;
        j["role"] = rec.role;
        j["advantage"] = rec.advantage;
        if (rec.tokens) {
            nlohmann::ordered_json tokens = nlohmann::ordered_json::array();
            for (std::size_t t = 0; t < rec.tokens->current.size(); ++t) {
                tokens.push_back({{"lp_cur", rec.tokens->current[t]},
                                  {"lp_ref", rec.tokens->reference[t]}});
            }
            j["tokens"] = std::move(tokens);
        }
        if (rec.objective_terms) j["objective_terms"] = *rec.objective_terms;
        out << j.dump() << "\n";
    }
}

}  // namespace uma
