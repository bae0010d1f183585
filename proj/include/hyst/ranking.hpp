#pragma once

#include <string>
#include <vector>

namespace hyst {

struct ScoredDoc {
    std::string id;
    double score = 0;
    bool operator==(const ScoredDoc&) const = default;
};

// Ordered by score descending; doc ids unique.
struct RankedList {
    std::vector<ScoredDoc> items;
    std::string source;

    std::size_t size() const { return items.size(); }
    bool empty() const { return items.empty(); }
    std::vector<std::string> ids() const;
    bool operator==(const RankedList&) const = default;
};

// Global result order: score descending, then doc id ascending.
inline bool ranks_before(const ScoredDoc& a, const ScoredDoc& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
}

// Sorts by ranks_before and keeps the first k.
void sort_and_truncate(std::vector<ScoredDoc>& docs, std::size_t k);

}  // namespace hyst
