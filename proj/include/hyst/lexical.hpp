#pragma once

#include "hyst/ranking.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace hyst {

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

struct Posting {
    std::uint32_t doc = 0;  // ordinal into doc_ids(), which are sorted ascending
    std::uint32_t tf = 0;
    bool operator==(const Posting&) const = default;
};

struct TextDoc {
    std::string id;
    std::string text;
};

// Okapi BM25 over tokenize()d text. Build once, search concurrently.
class InvertedIndex {
public:
    InvertedIndex() = default;

    // Throws IngestError on duplicate ids. Insertion order does not affect the result.
    static InvertedIndex build(std::span<const TextDoc> docs, Bm25Params params = {});

    std::size_t doc_count() const { return doc_ids_.size(); }
    double avg_doc_length() const { return avg_doc_length_; }
    const Bm25Params& params() const { return params_; }
    const std::vector<std::string>& doc_ids() const { return doc_ids_; }
    const std::vector<std::uint32_t>& doc_lengths() const { return doc_lengths_; }

    // Empty span when the term is not indexed.
    std::span<const Posting> postings(std::string_view term) const;
    std::size_t doc_frequency(std::string_view term) const { return postings(term).size(); }
    double idf(std::string_view term) const;

    // Top-k by score, ties by ascending doc id; zero-score documents are excluded.
    std::vector<ScoredDoc> search(std::string_view query, std::size_t k) const;

    std::string serialize() const;
    static InvertedIndex deserialize(std::string_view bytes);
    void save(const std::string& path) const;
    static InvertedIndex load(const std::string& path);

private:
    Bm25Params params_;
    std::vector<std::string> doc_ids_;
    std::vector<std::uint32_t> doc_lengths_;
    double avg_doc_length_ = 0;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
};

inline InvertedIndex build_index(std::span<const TextDoc> docs, double k1 = 1.2, double b = 0.75) {
    return InvertedIndex::build(docs, Bm25Params{k1, b});
}

inline std::vector<ScoredDoc> bm25_search(const InvertedIndex& index, std::string_view query, std::size_t k) {
    return index.search(query, k);
}

}  // namespace hyst
