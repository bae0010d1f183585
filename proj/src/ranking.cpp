#include "hyst/ranking.hpp"

#include <algorithm>

namespace hyst {

std::vector<std::string> RankedList::ids() const {
    std::vector<std::string> out;
    out.reserve(items.size());
    for (const auto& item : items) out.push_back(item.id);
    return out;
}

void sort_and_truncate(std::vector<ScoredDoc>& docs, std::size_t k) {
    if (k < docs.size()) {
        std::partial_sort(docs.begin(), docs.begin() + static_cast<std::ptrdiff_t>(k), docs.end(), ranks_before);
        docs.resize(k);
    } else {
        std::sort(docs.begin(), docs.end(), ranks_before);
    }
}

}  // namespace hyst
