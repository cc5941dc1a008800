#pragma once

#include <string>

#include "uma/policy.hpp"

namespace uma {

enum class JudgeKind { Default, Temporal, KnowledgeUpdate, Preference, Abstention };

struct JudgeTask {
    JudgeKind kind = JudgeKind::Default;
    std::string question;
    std::string answer;      // ground truth (unused by Preference/Abstention)
    std::string prediction;
    std::string rubric;       // Preference only
    std::string explanation;  // Abstention only
};

/// The grader prompt for a task, rendered from the fixed per-kind template.
std::string render_judge_prompt(const JudgeTask& task);

struct JudgeVerdict {
    int value = 0;
    /// The grader's reply contained neither "yes" nor "no"; the verdict was
    /// conservatively recorded as 0.
    bool flagged = false;
};

/// One grader completion mapped to a binary verdict via the first yes/no
/// token (case-insensitive). Throws JudgeUnavailable when the provider
/// cannot be reached.
JudgeVerdict judge(const JudgeTask& task, Policy& provider);

}  // namespace uma
