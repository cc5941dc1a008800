#include "uma/episode.hpp"

#include <fstream>
#include <sstream>

#include "uma/error.hpp"
#include "uma/text.hpp"

namespace uma {

namespace {

constexpr std::string_view kCoreHeader = "## Core Memory";
constexpr std::string_view kFocusHeader = "## Current Focus";
constexpr std::string_view kHistoryHeader = "## Recent Steps";

std::string render_sections(std::string_view system, std::string_view core,
                            std::string_view focus, const std::vector<HistoryItem>& history,
                            std::size_t history_from) {
    std::string out(system);
    if (!core.empty()) {
        out += "\n\n";
        out += kCoreHeader;
        out += "\n";
        out += core;
    }
    if (!focus.empty()) {
        out += "\n\n";
        out += kFocusHeader;
        out += "\n";
        out += focus;
    }
    if (history_from < history.size()) {
        out += "\n\n";
        out += kHistoryHeader;
        for (std::size_t i = history_from; i < history.size(); ++i) {
            out += "\n";
            out += std::to_string(i - history_from + 1);
            out += ". ";
            out += history[i].action;
            out += "\n   -> ";
            out += history[i].observation;
        }
    }
    return out;
}

// Smallest value in [lo, hi] satisfying `fits`, assuming `fits` is monotone
// nondecreasing over the range and fits(hi) is true.
template <typename Fits>
std::size_t lower_bound_fit(std::size_t lo, std::size_t hi, Fits fits) {
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (fits(mid)) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    return lo;
}

}  // namespace

std::string assemble_input(std::string_view system, std::string_view core,
                           std::string_view focus, const std::vector<HistoryItem>& history,
                           const PromptBudget& budget) {
    const auto& counter = budget.counter;
    if (counter.count(system) > budget.max_tokens) {
        throw BudgetTooSmall("system segment alone exceeds the prompt budget");
    }

    auto fits_full = [&](std::string_view c, std::string_view f, std::size_t hist_from) {
        return counter.count(render_sections(system, c, f, history, hist_from)) <=
               budget.max_tokens;
    };

    if (fits_full(core, focus, 0)) {
        return render_sections(system, core, focus, history, 0);
    }

    // Drop oldest history items first.
    std::size_t hist_from = history.size();
    if (fits_full(core, focus, history.size())) {
        hist_from = lower_bound_fit(0, history.size(),
                                    [&](std::size_t k) { return fits_full(core, focus, k); });
        return render_sections(system, core, focus, history, hist_from);
    }

    // Then left-truncate the focus.
    if (fits_full(core, std::string_view{}, history.size())) {
        const std::size_t cut = lower_bound_fit(0, focus.size(), [&](std::size_t c) {
            return fits_full(core, focus.substr(c), history.size());
        });
        return render_sections(system, core, focus.substr(cut), history, history.size());
    }

    // Last resort: left-truncate the core.
    const std::size_t cut = lower_bound_fit(0, core.size(), [&](std::size_t c) {
        return fits_full(core.substr(c), std::string_view{}, history.size());
    });
    return render_sections(system, core.substr(cut), std::string_view{}, history,
                           history.size());
}

namespace {

// Splits `text` into pieces of at most `size` tokens, cutting at whitespace
// where possible.
void split_oversized(const std::string& text, std::size_t size, const TokenCounter& counter,
                     std::vector<std::string>& out) {
    std::string_view rest = text;
    while (!rest.empty()) {
        if (counter.count(rest) <= size) {
            out.emplace_back(rest);
            return;
        }
        // Largest prefix within the budget.
        std::size_t hi = rest.size();
        std::size_t lo = 1;
        while (lo < hi) {
            const std::size_t mid = lo + (hi - lo + 1) / 2;
            if (counter.count(rest.substr(0, mid)) <= size) {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        std::size_t cut = lo;
        // Prefer the last whitespace at or before the cut.
        std::size_t ws = rest.substr(0, cut).find_last_of(" \t\n\r");
        if (ws != std::string_view::npos && ws > 0) cut = ws;
        if (cut == 0) cut = 1;  // guarantee progress even for indivisible runs
        out.emplace_back(rest.substr(0, cut));
        rest.remove_prefix(cut);
        while (!rest.empty() && (rest.front() == ' ' || rest.front() == '\n' ||
                                 rest.front() == '\t' || rest.front() == '\r')) {
            rest.remove_prefix(1);
        }
    }
}

}  // namespace

std::vector<Chunk> ingest_stream(const std::vector<std::string>& sessions, const Chunking& mode,
                                 const TokenCounter& counter) {
    if (sessions.empty()) throw EmptyStream("cannot ingest an empty session stream");

    std::vector<std::string> texts;
    if (mode.kind == Chunking::Kind::BySession) {
        texts = sessions;
    } else {
        if (mode.size == 0) throw ValidationError("fixed_tokens chunking requires size > 0");
        std::string group;
        auto flush = [&] {
            if (!group.empty()) {
                texts.push_back(std::move(group));
                group.clear();
            }
        };
        for (const auto& session : sessions) {
            if (counter.count(session) > mode.size) {
                flush();
                split_oversized(session, mode.size, counter, texts);
                continue;
            }
            if (group.empty()) {
                group = session;
            } else {
                std::string candidate = group + "\n\n" + session;
                if (counter.count(candidate) > mode.size) {
                    flush();
                    group = session;
                } else {
                    group = std::move(candidate);
                }
            }
        }
        flush();
    }

    std::vector<Chunk> chunks;
    chunks.reserve(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        Chunk c;
        c.index = static_cast<int>(i);
        c.token_count = static_cast<int>(counter.count(texts[i]));
        c.text = std::move(texts[i]);
        chunks.push_back(std::move(c));
    }
    return chunks;
}

Episode::Episode(std::vector<Chunk> chunks, MemoryBank bank)
    : chunks_(std::make_shared<std::vector<Chunk>>(std::move(chunks))),
      bank_(std::move(bank)) {
    if (chunks_->empty()) {
        phase_ = Phase::QA;
    } else {
        focus_ = (*chunks_)[0].text;
    }
}

void Episode::enable_retrieval(std::shared_ptr<const EmbeddingProvider> provider) {
    provider_ = std::move(provider);
    retriever_.reset();
}

std::string Episode::render_ranked(const RankedList& ranked) const {
    if (ranked.empty()) return "(no results)";
    std::string out;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        if (i > 0) out += "\n";
        out += std::to_string(i + 1);
        out += ". [chunk ";
        out += std::to_string(ranked[i].chunk);
        out += "] ";
        out += truncate_with_marker((*chunks_)[static_cast<std::size_t>(ranked[i].chunk)].text,
                                    kSnippetCapChars);
    }
    return out;
}

HistoryItem Episode::push_history(std::string action, std::string observation) {
    HistoryItem item{std::move(action), truncate_with_marker(observation, kObservationCapChars)};
    history_.push_back(item);
    return item;
}

HistoryItem Episode::step(const ToolCall& call) {
    const std::string action = render_call(call);

    if (call.tool == Tool::UpdateCore || call.tool == Tool::Answer) {
        throw PhaseViolationError("terminal actions are not dispatched through step()");
    }
    if (!tool_in_phase(call.tool, phase_)) {
        return push_history(action, "Error: tool '" + std::string(tool_name(call.tool)) +
                                        "' is not available in the " +
                                        std::string(phase_name(phase_)) + " phase.");
    }

    switch (call.tool) {
        case Tool::Add: {
            const auto& a = std::get<AddArgs>(call.args);
            return push_history(action, bank_.add(a.key, a.value).message);
        }
        case Tool::Update: {
            const auto& a = std::get<UpdateArgs>(call.args);
            return push_history(action, bank_.update(a.key, a.value).message);
        }
        case Tool::Delete: {
            const auto& a = std::get<DeleteArgs>(call.args);
            return push_history(action, bank_.erase(a.key).message);
        }
        case Tool::Retrieve: {
            const auto& a = std::get<RetrieveArgs>(call.args);
            const auto outcome = bank_.retrieve(a.key);
            return push_history(action, outcome.ok ? *outcome.payload : outcome.message);
        }
        case Tool::List: {
            const auto outcome = bank_.list_keys();
            std::string rendered = "Keys (insertion order): ";
            if (outcome.key_list->empty()) {
                rendered += "(none)";
            } else {
                for (std::size_t i = 0; i < outcome.key_list->size(); ++i) {
                    if (i > 0) rendered += ", ";
                    rendered += (*outcome.key_list)[i];
                }
            }
            return push_history(action, rendered);
        }
        case Tool::Bm25:
        case Tool::Embedding: {
            const auto& a = std::get<SearchArgs>(call.args);
            try {
                if (!retriever_) {
                    if (!provider_) {
                        throw ProviderFailure("no embedding provider configured");
                    }
                    retriever_ = HybridRetriever::build(*chunks_, provider_);
                }
                const RankedList ranked = call.tool == Tool::Bm25
                                              ? retriever_->bm25(a.query, a.top_k)
                                              : retriever_->embedding(a.query, a.top_k);
                return push_history(action, render_ranked(ranked));
            } catch (const ProviderFailure& e) {
                return push_history(action, std::string("Error: ") + e.what());
            } catch (const EmptyCorpus& e) {
                return push_history(action, std::string("Error: ") + e.what());
            }
        }
        case Tool::UpdateCore:
        case Tool::Answer:
            break;  // unreachable, handled above
    }
    return push_history(action, "Error: unhandled tool.");
}

HistoryItem Episode::note_invalid(std::string_view raw, std::string_view error) {
    return push_history(truncate_with_marker(raw, kSnippetCapChars), std::string(error));
}

void Episode::advance_locked(std::optional<std::string> new_core) {
    if (phase_ != Phase::Maintenance) {
        throw PhaseViolationError("cannot advance the chunk cursor in the QA phase");
    }
    if (new_core) bank_.set_core(std::move(*new_core));
    history_.clear();
    ++cursor_;
    if (cursor_ >= chunks_->size()) {
        phase_ = Phase::QA;
        focus_.clear();
    } else {
        focus_ = (*chunks_)[cursor_].text;
    }
}

void Episode::update_core_and_advance(std::string new_core) {
    advance_locked(std::move(new_core));
}

void Episode::force_advance() {
    advance_locked(std::nullopt);
}

void Episode::begin_query(std::string query) {
    if (phase_ != Phase::QA) {
        throw PhaseViolationError("begin_query requires the QA phase");
    }
    focus_ = std::move(query);
    history_.clear();
}

namespace {

std::string render_structured_session(const nlohmann::ordered_json& session) {
    std::string out;
    if (session.contains("date")) {
        out += "Date: ";
        out += session.at("date").get<std::string>();
    }
    if (session.contains("dialogue")) {
        for (const auto& turn : session.at("dialogue")) {
            if (!out.empty()) out += "\n";
            out += turn.at("speaker").get<std::string>();
            out += ": ";
            out += turn.at("text").get<std::string>();
        }
    }
    return out;
}

}  // namespace

EpisodeSample EpisodeSample::from_json(const nlohmann::ordered_json& j) {
    EpisodeSample s;
    if (j.contains("sample_id")) {
        const auto& id = j.at("sample_id");
        s.sample_id = id.is_string() ? id.get<std::string>() : id.dump();
    }
    if (j.contains("context")) {
        for (const auto& c : j.at("context")) s.context.push_back(c.get<std::string>());
    } else if (j.contains("sessions")) {
        for (const auto& session : j.at("sessions")) {
            if (session.is_string()) {
                s.context.push_back(session.get<std::string>());
            } else {
                s.context.push_back(render_structured_session(session));
            }
        }
    } else {
        throw ValidationError("sample record has neither 'context' nor 'sessions'");
    }
    if (j.contains("questions")) {
        for (const auto& q : j.at("questions")) {
            QuestionRecord rec;
            rec.question = q.at("question").get<std::string>();
            rec.answer = q.at("answer").get<std::string>();
            for (const auto& [k, v] : q.items()) {
                if (k != "question" && k != "answer") rec.metadata[k] = v;
            }
            s.questions.push_back(std::move(rec));
        }
    }
    return s;
}

nlohmann::ordered_json EpisodeSample::to_json() const {
    nlohmann::ordered_json j;
    j["sample_id"] = sample_id;
    j["context"] = context;
    nlohmann::ordered_json qs = nlohmann::ordered_json::array();
    for (const auto& q : questions) {
        nlohmann::ordered_json rec;
        rec["question"] = q.question;
        rec["answer"] = q.answer;
        for (const auto& [k, v] : q.metadata.items()) rec[k] = v;
        qs.push_back(std::move(rec));
    }
    j["questions"] = std::move(qs);
    return j;
}

std::vector<EpisodeSample> load_samples_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open sample file: " + path);
    std::vector<EpisodeSample> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto j = nlohmann::ordered_json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw ValidationError(path + ":" + std::to_string(line_no) + ": invalid JSON");
        }
        auto sample = EpisodeSample::from_json(j);
        if (sample.sample_id.empty()) sample.sample_id = "sample-" + std::to_string(line_no - 1);
        out.push_back(std::move(sample));
    }
    return out;
}

}  // namespace uma
