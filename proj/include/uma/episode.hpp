#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "uma/memory_bank.hpp"
#include "uma/retrieval.hpp"
#include "uma/tokens.hpp"
#include "uma/tool_call.hpp"

namespace uma {

/// One executed action as the agent will see it in its prompt: the rendered
/// call (or the raw snippet, for unparseable emissions) and the observation.
struct HistoryItem {
    std::string action;
    std::string observation;
};

struct StepLimits {
    int max_inner_steps = 16;
    int max_qa_steps = 16;
};

/// Builds the model input as [system || core || focus || history] with fixed
/// section delimiters. When over budget, drops oldest history items first,
/// then left-truncates the focus, then the core; the system segment is never
/// cut. Throws BudgetTooSmall when the system alone exceeds the budget.
std::string assemble_input(std::string_view system, std::string_view core,
                           std::string_view focus, const std::vector<HistoryItem>& history,
                           const PromptBudget& budget);

struct Chunking {
    enum class Kind { BySession, FixedTokens };
    Kind kind = Kind::BySession;
    std::size_t size = 0;  // FixedTokens only
};

/// Session texts -> chunk stream. BySession maps one session to one chunk.
/// FixedTokens greedily packs whole sessions up to `size` tokens, splitting
/// a session only when it alone exceeds the limit.
std::vector<Chunk> ingest_stream(const std::vector<std::string>& sessions, const Chunking& mode,
                                 const TokenCounter& counter);

/// The streaming environment: an immutable chunk list, the memory bank, the
/// phase/cursor/focus/history state, and dispatch for phase-legal tools.
/// One episode is strictly sequential; distinct episodes are independent.
class Episode {
public:
    explicit Episode(std::vector<Chunk> chunks, MemoryBank bank = {});

    Phase phase() const { return phase_; }
    std::size_t cursor() const { return cursor_; }
    const std::string& focus() const { return focus_; }
    const std::vector<HistoryItem>& history() const { return history_; }
    const std::vector<Chunk>& chunks() const { return *chunks_; }
    MemoryBank& bank() { return bank_; }
    const MemoryBank& bank() const { return bank_; }

    /// Builds retrieval indexes over the chunk stream; required before the
    /// QA-phase bm25/embedding tools can run.
    void enable_retrieval(std::shared_ptr<const EmbeddingProvider> provider);

    /// Executes a non-terminal tool (never update_core or answer). Phase
    /// violations and provider failures become error observations; the bank
    /// and cursor are untouched by them. Appends to history and returns the
    /// appended item.
    HistoryItem step(const ToolCall& call);

    /// Records an unparseable emission so the agent sees the parse error.
    HistoryItem note_invalid(std::string_view raw, std::string_view error);

    /// Commits `new_core`, clears history, advances the cursor; entering QA
    /// when the stream is exhausted. Maintenance phase only.
    void update_core_and_advance(std::string new_core);

    /// Cap-triggered advance: same transition with the core unchanged.
    void force_advance();

    /// Sets the query focus and clears history. The bank is shared across
    /// every query of the episode. QA phase only.
    void begin_query(std::string query);

    static constexpr std::size_t kObservationCapChars = 2000;
    static constexpr std::size_t kSnippetCapChars = 500;

private:
    std::shared_ptr<const std::vector<Chunk>> chunks_;
    MemoryBank bank_;
    Phase phase_ = Phase::Maintenance;
    std::size_t cursor_ = 0;
    std::string focus_;
    std::vector<HistoryItem> history_;
    std::optional<HybridRetriever> retriever_;
    std::shared_ptr<const EmbeddingProvider> provider_;

    void advance_locked(std::optional<std::string> new_core);
    HistoryItem push_history(std::string action, std::string observation);
    std::string render_ranked(const RankedList& ranked) const;
};

/// One experiment sample: session texts plus question/answer pairs.
struct QuestionRecord {
    std::string question;
    std::string answer;
    nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
};

struct EpisodeSample {
    std::string sample_id;
    std::vector<std::string> context;
    std::vector<QuestionRecord> questions;

    /// Accepts both the generic shape {context: [text...], questions: [...]}
    /// and generator records whose sessions carry structured dialogue (those
    /// are rendered to text, one session per context entry).
    static EpisodeSample from_json(const nlohmann::ordered_json& j);
    nlohmann::ordered_json to_json() const;
};

std::vector<EpisodeSample> load_samples_jsonl(const std::string& path);

}  // namespace uma
