#pragma once

#include "hyst/ranking.hpp"

#include <span>

namespace hyst {

inline constexpr int kDefaultRrfConstant = 60;

// Min-max normalizes each list to [0,1] (a constant list becomes all ones), then scores
// lambda * sparse + (1 - lambda) * dense over the union; a missing doc contributes 0.
RankedList interpolate(const RankedList& sparse, const RankedList& dense, double lambda, std::size_t k);

// Sum of 1 / (c + rank) over the lists containing each doc, rank starting at 1.
RankedList rrf(std::span<const RankedList> lists, int c, std::size_t k);

}  // namespace hyst
