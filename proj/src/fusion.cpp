#include "hyst/fusion.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace hyst {

namespace {

std::map<std::string, double> min_max(const RankedList& list) {
    std::map<std::string, double> out;
    if (list.empty()) return out;
    auto [lo, hi] = std::minmax_element(list.items.begin(), list.items.end(),
                                        [](const ScoredDoc& a, const ScoredDoc& b) { return a.score < b.score; });
    const double min = lo->score;
    const double range = hi->score - min;
    for (const auto& item : list.items) out[item.id] = range > 0 ? (item.score - min) / range : 1.0;
    return out;
}

}  // namespace

RankedList interpolate(const RankedList& sparse, const RankedList& dense, double lambda, std::size_t k) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must lie in [0, 1]");
    auto s = min_max(sparse);
    auto d = min_max(dense);
    std::map<std::string, double> combined;
    for (const auto& [id, v] : s) combined[id] += lambda * v;
    for (const auto& [id, v] : d) combined[id] += (1.0 - lambda) * v;

    RankedList out;
    out.source = "interpolate";
    out.items.reserve(combined.size());
    for (auto& [id, score] : combined) out.items.push_back({id, score});
    sort_and_truncate(out.items, k);
    return out;
}

RankedList rrf(std::span<const RankedList> lists, int c, std::size_t k) {
    if (c < 1) throw std::invalid_argument("rrf constant must be >= 1");
    if (lists.empty()) throw std::invalid_argument("rrf needs at least one list");
    std::map<std::string, double> scores;
    for (const auto& list : lists) {
        for (std::size_t i = 0; i < list.items.size(); ++i) {
            scores[list.items[i].id] += 1.0 / static_cast<double>(c + static_cast<int>(i) + 1);
        }
    }
    RankedList out;
    out.source = "rrf";
    out.items.reserve(scores.size());
    for (auto& [id, score] : scores) out.items.push_back({id, score});
    sort_and_truncate(out.items, k);
    return out;
}

}  // namespace hyst
