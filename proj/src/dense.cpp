#include "hyst/dense.hpp"

#include "binary_io.hpp"
#include "http_client.hpp"
#include "hyst/error.hpp"
#include "hyst/text.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace hyst {

using nlohmann::json;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace

Vector EmbeddingProvider::embed_one(const std::string& text) const {
    auto out = embed(std::span<const std::string>(&text, 1));
    return std::move(out.at(0));
}

double l2_norm(std::span<const double> v) {
    double sum = 0;
    for (double x : v) sum += x * x;
    return std::sqrt(sum);
}

std::vector<Vector> embed_hashed(std::span<const std::string> texts, std::size_t dim, std::uint64_t seed) {
    if (dim < 8) throw std::invalid_argument("hashed embedding dimension must be >= 8");
    const std::uint64_t salt = splitmix64(seed);
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
        Vector v(dim, 0.0);
        auto add = [&](std::string_view feature) {
            auto h = splitmix64(fnv1a(feature) ^ salt);
            v[h % dim] += (h >> 63) ? -1.0 : 1.0;
        };
        auto tokens = tokenize(text);
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            add(tokens[i]);
            if (i + 1 < tokens.size()) add(tokens[i] + ' ' + tokens[i + 1]);
        }
        if (double norm = l2_norm(v); norm > 0) {
            for (auto& x : v) x /= norm;
        }
        out.push_back(std::move(v));
    }
    return out;
}

HashedEmbedder::HashedEmbedder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
    if (dim < 8) throw std::invalid_argument("hashed embedding dimension must be >= 8");
}

std::vector<Vector> HashedEmbedder::embed(std::span<const std::string> texts) const {
    return embed_hashed(texts, dim_, seed_);
}

std::string HashedEmbedder::id() const {
    return "hashed-v1:dim=" + std::to_string(dim_) + ":seed=" + std::to_string(seed_);
}

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderConfig config) : config_(std::move(config)) {
    if (config_.dimension == 0) throw ConfigError("remote embedder needs a dimension");
    if (config_.batch_size == 0) config_.batch_size = 1;
}

std::string RemoteEmbedder::id() const {
    return "remote:" + config_.base_url + ":" + config_.model + ":dim=" + std::to_string(config_.dimension);
}

std::vector<Vector> RemoteEmbedder::embed(std::span<const std::string> texts) const {
    detail::RetryPolicy policy{config_.max_attempts, config_.initial_backoff, config_.max_backoff, config_.timeout};
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (std::size_t start = 0; start < texts.size(); start += config_.batch_size) {
        auto batch = texts.subspan(start, std::min(config_.batch_size, texts.size() - start));
        json body = {{"model", config_.model}, {"input", json(std::vector<std::string>(batch.begin(), batch.end()))}};
        auto response = detail::post_json(config_.base_url, "/embeddings", body, config_.api_key_env, policy);
        if (!response.contains("data") || !response["data"].is_array() || response["data"].size() != batch.size()) {
            throw TransportError("embedding response does not contain one vector per input");
        }
        std::vector<Vector> vectors(batch.size());
        for (std::size_t i = 0; i < response["data"].size(); ++i) {
            const auto& item = response["data"][i];
            auto idx = item.value("index", i);
            if (idx >= batch.size() || !vectors[idx].empty()) throw TransportError("embedding response has bad indices");
            vectors[idx] = item.at("embedding").get<Vector>();
            if (vectors[idx].size() != config_.dimension) {
                throw DimensionMismatch("provider returned " + std::to_string(vectors[idx].size()) +
                                        "-dim vectors, expected " + std::to_string(config_.dimension));
            }
        }
        for (auto& v : vectors) out.push_back(std::move(v));
    }
    return out;
}

CachedEmbedder::CachedEmbedder(std::shared_ptr<const EmbeddingProvider> inner, std::string cache_path)
    : inner_(std::move(inner)), path_(std::move(cache_path)) {
    std::ifstream in(path_);
    std::string line;
    const auto provider = inner_->id();
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) continue;
        if (j.value("provider", "") != provider) continue;
        auto vec = j.value("vector", Vector{});
        if (vec.size() != inner_->dimension()) continue;
        cache_[j.value("key", "")] = std::move(vec);
    }
}

std::size_t CachedEmbedder::cached_entries() const {
    std::lock_guard lock(mu_);
    return cache_.size();
}

std::vector<Vector> CachedEmbedder::embed(std::span<const std::string> texts) const {
    std::vector<std::string> keys;
    keys.reserve(texts.size());
    for (const auto& t : texts) keys.push_back(sha256_hex(t));

    std::vector<std::string> missing;
    std::vector<std::size_t> missing_pos;
    {
        std::lock_guard lock(mu_);
        for (std::size_t i = 0; i < texts.size(); ++i) {
            if (!cache_.count(keys[i])) {
                missing.push_back(texts[i]);
                missing_pos.push_back(i);
            }
        }
    }
    if (!missing.empty()) {
        auto fresh = inner_->embed(missing);
        std::lock_guard lock(mu_);
        std::ofstream out(path_, std::ios::app);
        const auto provider = inner_->id();
        for (std::size_t i = 0; i < fresh.size(); ++i) {
            const auto& key = keys[missing_pos[i]];
            if (cache_.count(key)) continue;
            if (out) out << json{{"provider", provider}, {"key", key}, {"vector", fresh[i]}}.dump() << '\n';
            cache_.emplace(key, std::move(fresh[i]));
        }
    }
    std::vector<Vector> result;
    result.reserve(texts.size());
    std::lock_guard lock(mu_);
    for (const auto& key : keys) result.push_back(cache_.at(key));
    return result;
}

void VectorStore::add(std::string id, AttrMap attrs, std::span<const double> vec) {
    if (vec.size() != dim_) {
        throw DimensionMismatch("vector of dimension " + std::to_string(vec.size()) + " inserted into " +
                                std::to_string(dim_) + "-dim store");
    }
    double norm = l2_norm(vec);
    if (!(norm > 0) || !std::isfinite(norm)) throw ZeroVectorError("cannot store zero vector for " + id);
    if (index_.count(id)) throw IngestError("duplicate id in vector store: " + id);
    index_.emplace(id, ids_.size());
    ids_.push_back(std::move(id));
    attrs_.push_back(std::move(attrs));
    for (double x : vec) data_.push_back(x / norm);
}

std::vector<ScoredDoc> VectorStore::knn(std::span<const double> query, std::size_t k, const FilterExpr* filter) const {
    if (k == 0) throw std::invalid_argument("k must be >= 1");
    if (query.size() != dim_) {
        throw DimensionMismatch("query of dimension " + std::to_string(query.size()) + " against " +
                                std::to_string(dim_) + "-dim store");
    }
    double norm = l2_norm(query);
    if (!(norm > 0)) throw ZeroVectorError("zero query vector");
    Vector q(query.begin(), query.end());
    for (auto& x : q) x /= norm;

    const bool filtered = filter && !filter->is_universal();
    std::vector<ScoredDoc> hits;
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        if (filtered && !matches(*filter, attrs_[i])) continue;
        const double* row = data_.data() + i * dim_;
        double dot = 0;
        for (std::size_t d = 0; d < dim_; ++d) dot += row[d] * q[d];
        hits.push_back({ids_[i], dot});
    }
    sort_and_truncate(hits, k);
    return hits;
}

namespace {
constexpr std::string_view kStoreMagic = "HYSTVECS";
constexpr std::uint32_t kStoreVersion = 1;
}  // namespace

std::string VectorStore::serialize() const {
    detail::BinaryWriter w;
    w.raw(kStoreMagic);
    w.u32(kStoreVersion);
    w.u64(dim_);
    w.u64(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        w.str(ids_[i]);
        Record shell{ids_[i], attrs_[i], {}, std::nullopt};
        w.str(record_to_json(shell)["attrs"].dump());
        for (double x : vector(i)) w.f64(x);
    }
    return w.data();
}

VectorStore VectorStore::deserialize(std::string_view bytes) {
    detail::BinaryReader r(bytes);
    r.expect(kStoreMagic);
    if (auto v = r.u32(); v != kStoreVersion) throw ParseError("unsupported vector store version " + std::to_string(v));
    VectorStore store(r.u64());
    auto n = r.u64();
    for (std::uint64_t i = 0; i < n; ++i) {
        auto id = r.str();
        auto attrs_json = json::parse(r.str());
        auto attrs = record_from_json(json{{"id", id}, {"text", ""}, {"attrs", attrs_json}}).attrs;
        store.index_.emplace(id, store.ids_.size());
        store.ids_.push_back(std::move(id));
        store.attrs_.push_back(std::move(attrs));
        for (std::size_t d = 0; d < store.dim_; ++d) store.data_.push_back(r.f64());
    }
    if (!r.at_end()) throw ParseError("trailing bytes in vector store");
    return store;
}

void VectorStore::save(const std::string& path) const { write_file(path, serialize()); }

VectorStore VectorStore::load(const std::string& path) { return deserialize(read_file(path)); }

}  // namespace hyst
