#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "uma/date.hpp"
#include "uma/episode.hpp"
#include "uma/money.hpp"
#include "uma/policy.hpp"
#include "uma/rng.hpp"

namespace uma {

struct SceneRef {
    std::string category;
    std::string scene;
    bool operator==(const SceneRef&) const = default;
};

/// The fixed two-level consumption taxonomy: 8 major categories, each with
/// its sub-scene list, plus per-scene plausible amount ranges used by the
/// deterministic synthesizer. Scene names are globally unique.
class Taxonomy {
public:
    static const Taxonomy& standard();

    const std::vector<std::string>& categories() const { return categories_; }
    const std::vector<std::string>& scenes(const std::string& category) const;
    const std::vector<SceneRef>& all_scenes() const { return all_; }
    bool valid(const std::string& category, const std::string& scene) const;
    /// Category owning a (globally unique) scene name, if any.
    std::optional<std::string> category_of(const std::string& scene) const;
    /// Inclusive cents range for deterministic amount sampling.
    std::pair<Money, Money> amount_range(const SceneRef& ref) const;

private:
    Taxonomy();
    std::vector<std::string> categories_;
    std::vector<std::pair<std::string, std::vector<std::string>>> scenes_;
    std::vector<SceneRef> all_;
    std::vector<std::pair<std::string, std::pair<std::int64_t, std::int64_t>>> ranges_;
};

struct Transaction {
    Date date;
    std::string category;
    std::string scene;
    Money amount;  // always > 0
    std::string description;
};

struct DialogueTurn {
    std::string speaker;  // "user" | "assistant"
    std::string text;
};

struct Session {
    Date date;
    std::vector<DialogueTurn> dialogue;
    std::vector<Transaction> transactions;
    /// Set when LLM synthesis failed repeatedly and the deterministic
    /// fallback produced this session instead.
    bool llm_fallback = false;
};

enum class QuestionTemplate {
    TimeRangeSceneAmount,
    TimeRangeMultiScene,
    GlobalTotal,
    MaxScene,
    MaxFrequencyDate,
    MaxSingleAmount,
    PointQuery,
    SingleDateSceneAmount,
};

inline constexpr int kTemplateCount = 8;

std::string_view template_name(QuestionTemplate t);
std::optional<QuestionTemplate> template_from_name(std::string_view name);

struct QuestionParams {
    std::vector<std::string> categories;  // sum templates (1 entry; multi-scene 2-3)
    std::string scene;                    // PointQuery
    std::optional<Date> from, to;         // range templates
    std::optional<Date> date;             // single-date templates
};

struct LedgerQuestion {
    QuestionTemplate tmpl = QuestionTemplate::GlobalTotal;
    QuestionParams params;
    std::string question;
    std::string answer;  // always equals oracle_answer(ledger, tmpl, params)
};

/// n distinct dates in [start, end], ascending, deterministic under seed.
/// Throws RangeTooSmall when the range holds fewer than n days.
std::vector<Date> sample_timeline(const Date& start, const Date& end, int n,
                                  std::uint64_t seed);

/// 1 to 5 distinct (category, scene) intents, uniform over the taxonomy.
std::vector<SceneRef> sample_scenes(const Taxonomy& taxonomy, Rng& rng);

enum class SynthesisMode { Deterministic, Llm };

/// Builds one session for `date` realizing every intent as exactly one
/// transaction. Deterministic mode renders templated dialogue (amounts
/// drawn from the per-scene ranges, one noise exchange per two
/// transactions, every amount mentioned verbatim). Llm mode prompts the
/// provider for a joint {dialogue, transactions} JSON payload, validating
/// it against the taxonomy; after 3 malformed responses it falls back to
/// deterministic synthesis and flags the session.
Session synthesize_session(const Date& date, const std::vector<SceneRef>& intents,
                           const Taxonomy& taxonomy, Rng& rng,
                           SynthesisMode mode = SynthesisMode::Deterministic,
                           Policy* provider = nullptr);

/// Exact answer over the ground-truth ledger: integer-cents arithmetic,
/// amounts rendered with two decimals, dates as YYYY-MM-DD, MaxScene as the
/// category name. Throws NoMatchingRecords when the selected slice is empty
/// (generation filters such questions out).
std::string oracle_answer(const std::vector<Transaction>& ledger, QuestionTemplate tmpl,
                          const QuestionParams& params);

/// Instantiates all 8 templates over realized (date, scene, range) combos,
/// filters ties and empty matches, and attaches oracle answers. May return
/// fewer than quota per template.
std::vector<LedgerQuestion> generate_questions(const std::vector<Transaction>& ledger,
                                               std::uint64_t seed, int per_template_quota = 8);

struct LedgerSample {
    std::string sample_id;
    std::vector<Session> sessions;
    std::vector<Transaction> ledger;
    std::vector<LedgerQuestion> questions;
};

struct LedgerDataset {
    std::vector<LedgerSample> samples;
};

struct DatasetConfig {
    Date start{2024, 1, 1};
    Date end{2024, 12, 31};
    int n_sessions = 10;
    int n_samples = 1;
    SynthesisMode mode = SynthesisMode::Deterministic;
    std::uint64_t seed = 0;
    bool diversify = false;  // paraphrase pass, llm mode only
    int per_template_quota = 8;
    Policy* synthesis_provider = nullptr;
};

/// One sample, generated from a seed stream derived as
/// mix(global_seed, sample_index) so parallel and serial generation agree
/// byte for byte.
LedgerSample generate_sample(const DatasetConfig& config, int sample_index);
LedgerDataset generate_dataset(const DatasetConfig& config);

nlohmann::ordered_json sample_to_json(const LedgerSample& sample);
LedgerSample sample_from_json(const nlohmann::ordered_json& j);

/// Chunk text for one session: "Date: ..." then one "speaker: text" line
/// per turn. Matches the generic sample loader's rendering.
std::string render_session_text(const Session& session);

EpisodeSample to_episode_sample(const LedgerSample& sample);

void write_dataset_jsonl(std::ostream& out, const LedgerDataset& dataset);
LedgerDataset read_dataset_jsonl(std::istream& in);

}  // namespace uma
