#include "hyst/lexical.hpp"

#include "binary_io.hpp"
#include "hyst/error.hpp"
#include "hyst/text.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace hyst {

namespace {
constexpr std::string_view kMagic = "HYSTBM25";
constexpr std::uint32_t kVersion = 1;
}  // namespace

InvertedIndex InvertedIndex::build(std::span<const TextDoc> docs, Bm25Params params) {
    std::vector<std::size_t> order(docs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return docs[a].id < docs[b].id; });
    for (std::size_t i = 1; i < order.size(); ++i) {
        if (docs[order[i]].id == docs[order[i - 1]].id) throw IngestError("duplicate document id " + docs[order[i]].id);
    }

    InvertedIndex index;
    index.params_ = params;
    index.doc_ids_.reserve(docs.size());
    index.doc_lengths_.reserve(docs.size());
    std::uint64_t total = 0;
    for (std::size_t ordinal = 0; ordinal < order.size(); ++ordinal) {
        const auto& doc = docs[order[ordinal]];
        auto tokens = tokenize(doc.text);
        std::map<std::string, std::uint32_t> counts;
        for (auto& t : tokens) ++counts[std::move(t)];
        for (auto& [term, tf] : counts) {
            index.postings_[term].push_back({static_cast<std::uint32_t>(ordinal), tf});
        }
        index.doc_ids_.push_back(doc.id);
        index.doc_lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
        total += tokens.size();
    }
    index.avg_doc_length_ = docs.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(docs.size());
    return index;
}

std::span<const Posting> InvertedIndex::postings(std::string_view term) const {
    auto it = postings_.find(std::string(term));
    if (it == postings_.end()) return {};
    return it->second;
}

double InvertedIndex::idf(std::string_view term) const {
    auto n = static_cast<double>(doc_count());
    auto df = static_cast<double>(doc_frequency(term));
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

std::vector<ScoredDoc> InvertedIndex::search(std::string_view query, std::size_t k) const {
    std::vector<std::string> terms;
    for (auto& t : tokenize(query)) {
        if (std::find(terms.begin(), terms.end(), t) == terms.end()) terms.push_back(std::move(t));
    }
    std::vector<double> scores(doc_count(), 0.0);
    std::vector<std::uint32_t> touched;
    const double k1 = params_.k1;
    const double b = params_.b;
    for (const auto& term : terms) {
        auto plist = postings(term);
        if (plist.empty()) continue;
        const double w = idf(term);
        for (const auto& p : plist) {
            const double tf = p.tf;
            const double norm = k1 * (1.0 - b + b * doc_lengths_[p.doc] / avg_doc_length_);
            if (scores[p.doc] == 0.0) touched.push_back(p.doc);
            scores[p.doc] += w * tf * (k1 + 1.0) / (tf + norm);
        }
    }
    std::vector<ScoredDoc> out;
    out.reserve(touched.size());
    for (auto d : touched) {
        if (scores[d] > 0.0) out.push_back({doc_ids_[d], scores[d]});
    }
    sort_and_truncate(out, k);
    return out;
}

std::string InvertedIndex::serialize() const {
    detail::BinaryWriter w;
    w.raw(kMagic);
    w.u32(kVersion);
    w.f64(params_.k1);
    w.f64(params_.b);
    w.u64(doc_ids_.size());
    for (std::size_t i = 0; i < doc_ids_.size(); ++i) {
        w.str(doc_ids_[i]);
        w.u32(doc_lengths_[i]);
    }
    std::vector<const std::string*> terms;
    terms.reserve(postings_.size());
    for (const auto& [term, _] : postings_) terms.push_back(&term);
    std::sort(terms.begin(), terms.end(), [](const auto* a, const auto* b) { return *a < *b; });
    w.u64(terms.size());
    for (const auto* term : terms) {
        const auto& plist = postings_.at(*term);
        w.str(*term);
        w.u64(plist.size());
        for (const auto& p : plist) {
            w.u32(p.doc);
            w.u32(p.tf);
        }
    }
    return w.data();
}

InvertedIndex InvertedIndex::deserialize(std::string_view bytes) {
    detail::BinaryReader r(bytes);
    r.expect(kMagic);
    if (auto v = r.u32(); v != kVersion) throw ParseError("unsupported BM25 index version " + std::to_string(v));
    InvertedIndex index;
    index.params_.k1 = r.f64();
    index.params_.b = r.f64();
    auto n = r.u64();
    std::uint64_t total = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
        index.doc_ids_.push_back(r.str());
        index.doc_lengths_.push_back(r.u32());
        total += index.doc_lengths_.back();
    }
    index.avg_doc_length_ = n == 0 ? 0.0 : static_cast<double>(total) / static_cast<double>(n);
    auto term_count = r.u64();
    for (std::uint64_t t = 0; t < term_count; ++t) {
        auto term = r.str();
        auto count = r.u64();
        std::vector<Posting> plist;
        plist.reserve(count);
        for (std::uint64_t i = 0; i < count; ++i) {
            Posting p;
            p.doc = r.u32();
            p.tf = r.u32();
            if (p.doc >= n) throw ParseError("posting references unknown document");
            plist.push_back(p);
        }
        index.postings_.emplace(std::move(term), std::move(plist));
    }
    if (!r.at_end()) throw ParseError("trailing bytes in BM25 index");
    return index;
}

void InvertedIndex::save(const std::string& path) const { write_file(path, serialize()); }

InvertedIndex InvertedIndex::load(const std::string& path) { return deserialize(read_file(path)); }

}  // namespace hyst
