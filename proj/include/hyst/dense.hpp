#pragma once

#include "hyst/corpus.hpp"
#include "hyst/filter.hpp"
#include "hyst/ranking.hpp"

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace hyst {

using Vector = std::vector<double>;

// Same text maps to the same vector for a given provider id; every vector has dimension().
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::vector<Vector> embed(std::span<const std::string> texts) const = 0;
    virtual std::size_t dimension() const = 0;
    // Stable identifier, used as the embedding cache key.
    virtual std::string id() const = 0;

    Vector embed_one(const std::string& text) const;
};

// Feature hashing of lowercase unigrams and bigrams with a random sign per feature,
// L2-normalized. Offline and reproducible; empty text yields the zero vector.
std::vector<Vector> embed_hashed(std::span<const std::string> texts, std::size_t dim, std::uint64_t seed);

class HashedEmbedder final : public EmbeddingProvider {
public:
    HashedEmbedder(std::size_t dim, std::uint64_t seed);
    std::vector<Vector> embed(std::span<const std::string> texts) const override;
    std::size_t dimension() const override { return dim_; }
    std::string id() const override;

private:
    std::size_t dim_;
    std::uint64_t seed_;
};

struct RemoteEmbedderConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string model = "text-embedding-3-small";
    std::string api_key_env = "OPENAI_API_KEY";
    std::size_t dimension = 1536;
    std::size_t batch_size = 64;
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{500};
    std::chrono::milliseconds max_backoff{4000};
    std::chrono::seconds timeout{60};
};

// OpenAI-style `POST {base_url}/embeddings`. Throws DimensionMismatch when the service
// answers with a different width than configured.
class RemoteEmbedder final : public EmbeddingProvider {
public:
    explicit RemoteEmbedder(RemoteEmbedderConfig config);
    std::vector<Vector> embed(std::span<const std::string> texts) const override;
    std::size_t dimension() const override { return config_.dimension; }
    std::string id() const override;

private:
    RemoteEmbedderConfig config_;
};

inline std::vector<Vector> embed_remote(std::span<const std::string> texts, const RemoteEmbedderConfig& config) {
    return RemoteEmbedder(config).embed(texts);
}

// Wraps a provider with a JSONL cache keyed by (provider id, sha256(text)).
class CachedEmbedder final : public EmbeddingProvider {
public:
    CachedEmbedder(std::shared_ptr<const EmbeddingProvider> inner, std::string cache_path);
    std::vector<Vector> embed(std::span<const std::string> texts) const override;
    std::size_t dimension() const override { return inner_->dimension(); }
    std::string id() const override { return inner_->id(); }

    std::size_t cached_entries() const;

private:
    std::shared_ptr<const EmbeddingProvider> inner_;
    std::string path_;
    mutable std::mutex mu_;
    mutable std::unordered_map<std::string, Vector> cache_;
};

// Exact cosine search with metadata pre-filtering. Vectors are unit-normalized on insert.
class VectorStore {
public:
    explicit VectorStore(std::size_t dimension = 0) : dim_(dimension) {}

    std::size_t dimension() const { return dim_; }
    std::size_t size() const { return ids_.size(); }
    const std::vector<std::string>& ids() const { return ids_; }
    std::span<const double> vector(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
    const AttrMap& attrs(std::size_t i) const { return attrs_[i]; }

    // Throws DimensionMismatch, ZeroVectorError, or IngestError on a duplicate id.
    void add(std::string id, AttrMap attrs, std::span<const double> vec);

    // Candidates are the entries matching `filter` (all when null or universal);
    // ranked by cosine descending, ties by ascending id.
    std::vector<ScoredDoc> knn(std::span<const double> query, std::size_t k, const FilterExpr* filter = nullptr) const;

    std::string serialize() const;
    static VectorStore deserialize(std::string_view bytes);
    void save(const std::string& path) const;
    static VectorStore load(const std::string& path);

private:
    std::size_t dim_;
    std::vector<std::string> ids_;
    std::vector<AttrMap> attrs_;
    std::vector<double> data_;
    std::unordered_map<std::string, std::size_t> index_;
};

inline std::vector<ScoredDoc> knn(const VectorStore& store, std::span<const double> query, std::size_t k,
                                  const FilterExpr* filter = nullptr) {
    return store.knn(query, k, filter);
}

double l2_norm(std::span<const double> v);

}  // namespace hyst
