#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace uma {

/// One unit of the input stream.
struct Chunk {
    int index = 0;
    std::string text;
    int token_count = 0;
};

struct ScoredChunk {
    int chunk = 0;
    double score = 0.0;
};

/// Scores nonincreasing; ties broken by lower chunk index; length <= top_k.
using RankedList = std::vector<ScoredChunk>;

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

/// Okapi BM25 over lowercase alphanumeric tokens, immutable once built.
/// IDF is the +1-smoothed form ln(1 + (N - n_t + 0.5) / (n_t + 0.5)), so
/// every matching document scores strictly positive; documents sharing no
/// query term are never returned.
class Bm25Index {
public:
    static Bm25Index build(const std::vector<Chunk>& chunks, Bm25Params params = {});

    RankedList query(std::string_view query_text, int top_k) const;

    double avg_doc_length() const { return avg_doc_length_; }
    std::size_t doc_count() const { return doc_lengths_.size(); }

private:
    // term -> (chunk index, term frequency), chunk indices ascending
    std::unordered_map<std::string, std::vector<std::pair<int, int>>> postings_;
    std::vector<int> doc_lengths_;
    double avg_doc_length_ = 0.0;
    Bm25Params params_;
};

/// Text-to-unit-vector encoder. Implementations must be deterministic per
/// instance and return vectors of the advertised dimension with L2 norm
/// within 1e-6 of 1.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual const std::string& name() const = 0;
    virtual int dimension() const = 0;
    virtual std::vector<double> embed(const std::string& text) const = 0;

    /// Batched embedding, order-stable by input position.
    virtual std::vector<std::vector<double>> embed_batch(
        const std::vector<std::string>& texts) const;
};

/// Offline default: tokens hashed into a fixed number of buckets, counted,
/// then L2-normalized. Fully reproducible with no model downloads. Texts
/// with no tokens map to a fixed unit basis vector.
class HashedBowEmbedding final : public EmbeddingProvider {
public:
    explicit HashedBowEmbedding(int dimension = 256);
    const std::string& name() const override { return name_; }
    int dimension() const override { return dimension_; }
    std::vector<double> embed(const std::string& text) const override;

private:
    std::string name_;
    int dimension_;
};

struct RemoteEmbeddingConfig {
    std::string base_url;   // e.g. http://localhost:8080
    std::string model;
    int dimension = 384;
    std::string api_key_env = "UMA_EMBEDDING_API_KEY";
    int timeout_seconds = 60;
};

/// HTTP provider speaking the common embeddings-endpoint shape:
/// request {"model", "input": [...]} -> {"data": [{"embedding": [...]}]}.
/// Responses are re-normalized so the unit-norm contract always holds.
class RemoteEmbedding final : public EmbeddingProvider {
public:
    explicit RemoteEmbedding(RemoteEmbeddingConfig config);
    const std::string& name() const override { return name_; }
    int dimension() const override { return config_.dimension; }
    std::vector<double> embed(const std::string& text) const override;
    std::vector<std::vector<double>> embed_batch(
        const std::vector<std::string>& texts) const override;

private:
    RemoteEmbeddingConfig config_;
    std::string name_;
};

/// Chunk embeddings materialized once at build time.
class EmbeddingIndex {
public:
    static EmbeddingIndex build(const std::vector<Chunk>& chunks,
                                std::shared_ptr<const EmbeddingProvider> provider);

    /// Top-k by cosine similarity over all chunks; ties by lower index.
    RankedList query(std::string_view query_text, int top_k) const;

private:
    std::shared_ptr<const EmbeddingProvider> provider_;
    std::vector<std::vector<double>> vectors_;
};

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

/// Reciprocal rank fusion: score(d) = sum over input rankings containing d
/// of 1 / (k_rrf + rank), ranks 1-based. Input scores are ignored; only
/// positions matter.
RankedList rrf_fuse(const std::vector<RankedList>& rankings, double k_rrf, int top_k);

inline constexpr double kDefaultRrfK = 60.0;

/// Both retrieval routes over one chunk list, built once per episode and
/// safe for concurrent readers.
class HybridRetriever {
public:
    static HybridRetriever build(const std::vector<Chunk>& chunks,
                                 std::shared_ptr<const EmbeddingProvider> provider,
                                 Bm25Params params = {});

    RankedList bm25(std::string_view query, int top_k) const { return bm25_.query(query, top_k); }
    RankedList embedding(std::string_view query, int top_k) const {
        return embedding_.query(query, top_k);
    }
    /// RRF over both routes, each queried with top_k, fused to top_k.
    RankedList fused(std::string_view query, int top_k) const;

private:
    Bm25Index bm25_;
    EmbeddingIndex embedding_;
};

/// The hybrid RAG selection: BM25 and embedding lists fused with RRF
/// (k = 60), at most 20 chunks, returned in fused order.
std::vector<Chunk> rag_top20(const std::vector<Chunk>& chunks, std::string_view query,
                             std::shared_ptr<const EmbeddingProvider> provider);

}  // namespace uma
