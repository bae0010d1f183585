#include "doctest.h"

#include "hyst/fusion.hpp"
#include "oracles/generators.hpp"

#include <algorithm>
#include <cmath>
#include <map>

using namespace hyst;

namespace {

RankedList list(std::vector<ScoredDoc> items) { return RankedList{std::move(items), "test"}; }

RankedList random_list(gen::Gen& g, std::size_t universe, std::size_t n) {
    std::vector<ScoredDoc> items;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < universe; ++i) ids.push_back("doc" + std::to_string(i));
    for (std::size_t i = 0; i < n; ++i) {
        auto j = i + g.below(ids.size() - i);
        std::swap(ids[i], ids[j]);
        items.push_back({ids[i], g.small_number()});
    }
    sort_and_truncate(items, n);
    return list(items);
}

}  // namespace

TEST_CASE("interpolation on a three-document fixture") {
    auto sparse = list({{"a", 9}, {"b", 6}, {"c", 3}});
    auto dense = list({{"b", 0.9}, {"c", 0.5}, {"d", 0.1}});
    auto fused = interpolate(sparse, dense, 0.5, 10);
    // sparse normalized: a 1, b 0.5, c 0; dense normalized: b 1, c 0.5, d 0
    REQUIRE(fused.size() == 4);
    CHECK(fused.items[0].id == "b");
    CHECK(fused.items[0].score == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(fused.items[1].id == "a");
    CHECK(fused.items[1].score == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(fused.items[2].id == "c");
    CHECK(fused.items[2].score == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(fused.items[3].id == "d");
    CHECK(fused.items[3].score == 0.0);
}

TEST_CASE("interpolation endpoints") {
    auto sparse = list({{"a", 9}, {"b", 6}, {"c", 3}});
    auto dense = list({{"c", 0.9}, {"d", 0.5}, {"a", 0.1}});
    auto s = interpolate(sparse, dense, 1.0, 10).ids();
    CHECK(std::vector<std::string>(s.begin(), s.begin() + 3) == sparse.ids());
    auto d = interpolate(sparse, dense, 0.0, 10).ids();
    CHECK(std::vector<std::string>(d.begin(), d.begin() + 3) == dense.ids());
    CHECK_THROWS_AS(interpolate(sparse, dense, 1.5, 10), std::invalid_argument);
    CHECK(interpolate(list({{"x", 2}, {"y", 2}}), list({}), 0.5, 10).items[0].score == 0.5);
}

TEST_CASE("rrf arithmetic") {
    std::vector<RankedList> two = {list({{"a", 3}, {"b", 2}}), list({{"a", 0.9}, {"c", 0.1}})};
    auto fused = rrf(two, 60, 10);
    CHECK(fused.items[0].id == "a");
    CHECK(fused.items[0].score == 2.0 / 61.0);
    std::vector<RankedList> one = {list({{"z", 3}, {"b", 2}, {"q", 1}})};
    CHECK(rrf(one, 60, 10).ids() == one[0].ids());
    CHECK_THROWS_AS(rrf(one, 0, 10), std::invalid_argument);
    CHECK_THROWS_AS(rrf(std::vector<RankedList>{}, 60, 10), std::invalid_argument);
}

TEST_CASE("rrf and interpolation against direct computation") {
    gen::Gen g(5);
    for (int t = 0; t < 40; ++t) {
        std::vector<RankedList> lists = {random_list(g, 20, 12), random_list(g, 20, 8), random_list(g, 20, 15)};
        std::map<std::string, double> want;
        for (const auto& l : lists) {
            for (std::size_t r = 0; r < l.size(); ++r) want[l.items[r].id] += 1.0 / (60.0 + static_cast<double>(r + 1));
        }
        auto got = rrf(lists, 60, 100);
        REQUIRE(got.size() == want.size());
        for (const auto& item : got.items) {
            CHECK(std::abs(item.score - want[item.id]) < 1e-15);
            CHECK(item.score > 0);
        }
        for (std::size_t i = 1; i < got.size(); ++i) CHECK_FALSE(ranks_before(got.items[i], got.items[i - 1]));

        // symmetry
        // quarter steps keep 1 - (1 - lambda) exact, so ties resolve identically
        const double lambda = static_cast<double>(g.below(5)) / 4.0;
        auto ab = interpolate(lists[0], lists[1], lambda, 100);
        auto ba = interpolate(lists[1], lists[0], 1.0 - lambda, 100);
        REQUIRE(ab.size() == ba.size());
        for (std::size_t i = 0; i < ab.size(); ++i) {
            CHECK(ab.items[i].id == ba.items[i].id);
            CHECK(std::abs(ab.items[i].score - ba.items[i].score) < 1e-12);
        }

    }
}
