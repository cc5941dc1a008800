#include "uma/judge.hpp"

#include "uma/error.hpp"
#include "uma/text.hpp"

namespace uma {

namespace {

constexpr const char* kGeneralIntro =
    "I will give you a question, a correct answer, and a response from a model. Please "
    "answer yes if the response contains the correct answer. Otherwise, answer no. If the "
    "response is equivalent to the correct answer or contains all the intermediate steps to "
    "get the correct answer, you should also answer yes. If the response only contains a "
    "subset of the information required by the answer, answer no.";

constexpr const char* kTemporalAddendum =
    " In addition, do not penalize off-by-one errors for the number of days. If the "
    "question asks for the number of days/weeks/months, etc., and the model makes "
    "off-by-one errors (e.g., predicting 19 days when the answer is 18), the model's "
    "response is still correct.";

constexpr const char* kKnowledgeUpdateAddendum =
    " If the response contains some previous information along with an updated answer, the "
    "response should be considered as correct as long as the updated answer is the required "
    "answer.";

constexpr const char* kFinalQuestion = "Is the model response correct? Answer yes or no only.";

std::string general_body(const JudgeTask& task) {
    return "\n\nQuestion: " + task.question + "\n\nCorrect Answer: " + task.answer +
           "\n\nModel Response: " + task.prediction + "\n\n" + kFinalQuestion;
}

}  // namespace

std::string render_judge_prompt(const JudgeTask& task) {
    switch (task.kind) {
        case JudgeKind::Default:
            return std::string(kGeneralIntro) + general_body(task);
        case JudgeKind::Temporal:
            return std::string(kGeneralIntro) + kTemporalAddendum + general_body(task);
        case JudgeKind::KnowledgeUpdate:
            return std::string(kGeneralIntro) + kKnowledgeUpdateAddendum + general_body(task);
        case JudgeKind::Preference:
            return "I will give you a question, a rubric of the desired response, and a "
                   "response from a model. Please answer yes if the response satisfies the "
                   "desired response. Otherwise, answer no. The response is correct as long "
                   "as it recalls and utilizes the user's personal information correctly."
                   "\n\nQuestion: " + task.question + "\n\nRubric: " + task.rubric +
                   "\n\nModel Response: " + task.prediction + "\n\n" + kFinalQuestion;
        case JudgeKind::Abstention:
            return "I will give you an unanswerable question, an explanation of why it is "
                   "unanswerable, and a response from a model. Please answer yes if the "
                   "model correctly identifies the question as unanswerable. The model "
                   "could say that the information is incomplete, or that the question "
                   "cannot be answered based on the available information. Otherwise, "
                   "answer no.\n\nQuestion: " + task.question +
                   "\n\nExplanation: " + task.explanation +
                   "\n\nModel Response: " + task.prediction +
                   "\n\nDoes the model correctly identify the question as unanswerable? "
                   "Answer yes or no only.";
    }
    return std::string(kGeneralIntro) + general_body(task);
}

JudgeVerdict judge(const JudgeTask& task, Policy& provider) {
    Completion completion;
    try {
        completion = provider.complete(render_judge_prompt(task), Phase::QA);
    } catch (const TransportError& e) {
        throw JudgeUnavailable(e.what());
    }
    // First yes/no token decides; anything else is a flagged 0.
    for (const auto& token : alnum_tokens(completion.text)) {
        if (token == "yes") return {1, false};
        if (token == "no") return {0, false};
    }
    return {0, true};
}

}  // namespace uma
