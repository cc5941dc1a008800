#include "uma/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

#include <json.hpp>

#include "uma/error.hpp"
#include "uma/text.hpp"

namespace uma {

namespace {

void sort_ranked(RankedList& list) {
    std::stable_sort(list.begin(), list.end(), [](const ScoredChunk& a, const ScoredChunk& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.chunk < b.chunk;
    });
}

void clamp_top_k(RankedList& list, int top_k) {
    if (top_k < 0) top_k = 0;
    if (list.size() > static_cast<std::size_t>(top_k)) {
        list.resize(static_cast<std::size_t>(top_k));
    }
}

}  // namespace

Bm25Index Bm25Index::build(const std::vector<Chunk>& chunks, Bm25Params params) {
    if (chunks.empty()) throw EmptyCorpus("cannot build a BM25 index over zero chunks");
    Bm25Index index;
    index.params_ = params;
    index.doc_lengths_.resize(chunks.size(), 0);
    long total = 0;
    for (std::size_t d = 0; d < chunks.size(); ++d) {
        const auto tokens = alnum_tokens(chunks[d].text);
        index.doc_lengths_[d] = static_cast<int>(tokens.size());
        total += static_cast<long>(tokens.size());
        std::unordered_map<std::string, int> tf;
        for (const auto& t : tokens) ++tf[t];
        for (auto& [term, freq] : tf) {
            index.postings_[term].emplace_back(static_cast<int>(d), freq);
        }
    }
    for (auto& [term, posting] : index.postings_) {
        std::sort(posting.begin(), posting.end());
    }
    index.avg_doc_length_ = static_cast<double>(total) / static_cast<double>(chunks.size());
    return index;
}

RankedList Bm25Index::query(std::string_view query_text, int top_k) const {
    const auto tokens = alnum_tokens(query_text);
    if (tokens.empty() || top_k <= 0) return {};
    // Repeated query terms count once.
    std::set<std::string> terms(tokens.begin(), tokens.end());

    const double n_docs = static_cast<double>(doc_lengths_.size());
    std::unordered_map<int, double> scores;
    for (const auto& term : terms) {
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const double n_t = static_cast<double>(it->second.size());
        const double idf = std::log(1.0 + (n_docs - n_t + 0.5) / (n_t + 0.5));
        for (const auto& [doc, tf] : it->second) {
            const double len_norm =
                1.0 - params_.b + params_.b * doc_lengths_[static_cast<std::size_t>(doc)] /
                                      avg_doc_length_;
            const double contrib = idf * (tf * (params_.k1 + 1.0)) / (tf + params_.k1 * len_norm);
            scores[doc] += contrib;
        }
    }

    RankedList out;
    out.reserve(scores.size());
    for (const auto& [doc, score] : scores) out.push_back({doc, score});
    sort_ranked(out);
    clamp_top_k(out, top_k);
    return out;
}

std::vector<std::vector<double>> EmbeddingProvider::embed_batch(
    const std::vector<std::string>& texts) const {
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed(t));
    return out;
}

HashedBowEmbedding::HashedBowEmbedding(int dimension)
    : name_("hashed-bow-" + std::to_string(dimension)), dimension_(dimension) {}

std::vector<double> HashedBowEmbedding::embed(const std::string& text) const {
    std::vector<double> v(static_cast<std::size_t>(dimension_), 0.0);
    const auto tokens = alnum_tokens(text);
    if (tokens.empty()) {
        v[0] = 1.0;
        return v;
    }
    for (const auto& t : tokens) {
        v[fnv1a64(t) % static_cast<std::uint64_t>(dimension_)] += 1.0;
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

EmbeddingIndex EmbeddingIndex::build(const std::vector<Chunk>& chunks,
                                     std::shared_ptr<const EmbeddingProvider> provider) {
    if (!provider) throw ProviderFailure("no embedding provider configured");
    EmbeddingIndex index;
    index.provider_ = std::move(provider);
    std::vector<std::string> texts;
    texts.reserve(chunks.size());
    for (const auto& c : chunks) texts.push_back(c.text);
    index.vectors_ = index.provider_->embed_batch(texts);
    return index;
}

RankedList EmbeddingIndex::query(std::string_view query_text, int top_k) const {
    if (top_k <= 0) return {};
    const auto q = provider_->embed(std::string(query_text));
    RankedList out;
    out.reserve(vectors_.size());
    for (std::size_t d = 0; d < vectors_.size(); ++d) {
        out.push_back({static_cast<int>(d), cosine_similarity(q, vectors_[d])});
    }
    sort_ranked(out);
    clamp_top_k(out, top_k);
    return out;
}

RankedList rrf_fuse(const std::vector<RankedList>& rankings, double k_rrf, int top_k) {
    std::unordered_map<int, double> scores;
    for (const auto& ranking : rankings) {
        for (std::size_t pos = 0; pos < ranking.size(); ++pos) {
            scores[ranking[pos].chunk] += 1.0 / (k_rrf + static_cast<double>(pos + 1));
        }
    }
    RankedList out;
    out.reserve(scores.size());
    for (const auto& [doc, score] : scores) out.push_back({doc, score});
    sort_ranked(out);
    clamp_top_k(out, top_k);
    return out;
}

HybridRetriever HybridRetriever::build(const std::vector<Chunk>& chunks,
                                       std::shared_ptr<const EmbeddingProvider> provider,
                                       Bm25Params params) {
    HybridRetriever r;
    r.bm25_ = Bm25Index::build(chunks, params);
    r.embedding_ = EmbeddingIndex::build(chunks, std::move(provider));
    return r;
}

RankedList HybridRetriever::fused(std::string_view query, int top_k) const {
    return rrf_fuse({bm25_.query(query, top_k), embedding_.query(query, top_k)}, kDefaultRrfK,
                    top_k);
}

std::vector<Chunk> rag_top20(const std::vector<Chunk>& chunks, std::string_view query,
                             std::shared_ptr<const EmbeddingProvider> provider) {
    const auto retriever = HybridRetriever::build(chunks, std::move(provider));
    const auto fused = retriever.fused(query, 20);
    std::vector<Chunk> out;
    out.reserve(fused.size());
    for (const auto& sc : fused) out.push_back(chunks[static_cast<std::size_t>(sc.chunk)]);
    return out;
}

}  // namespace uma
