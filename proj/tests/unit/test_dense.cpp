#include "doctest.h"

#include "hyst/dense.hpp"
#include "hyst/error.hpp"
#include "oracles/generators.hpp"
#include "oracles/hash_oracle.hpp"
#include "oracles/knn_oracle.hpp"

#include <cmath>
#include <filesystem>

using namespace hyst;

TEST_CASE("hashed embedder") {
    HashedEmbedder e(512, 42);
    CHECK(e.id() == "hashed-v1:dim=512:seed=42");
    CHECK(e.embed_one("red fox") == e.embed_one("red fox"));
    CHECK(e.embed_one("Red, FOX!") == e.embed_one("red fox"));
    CHECK(e.embed_one("red fox").size() == 512);
    CHECK(l2_norm(e.embed_one("red fox")) == doctest::Approx(1.0));

    auto zero = e.embed_one("");
    CHECK(l2_norm(zero) == 0.0);
    VectorStore store(512);
    CHECK_THROWS_AS(store.add("z", {}, zero), ZeroVectorError);

    for (const char* t : {"red fox", "red fox dog", "blue car", "the quick brown fox"}) {
        auto v = e.embed_one(t);
        auto o = oracle::hashed(t, 512, 42);
        for (std::size_t i = 0; i < v.size(); ++i) REQUIRE(std::abs(v[i] - o[i]) < 1e-15);
    }
    const double near = oracle::cosine(oracle::hashed("red fox", 512, 42), oracle::hashed("red fox dog", 512, 42));
    const double far = oracle::cosine(oracle::hashed("red fox", 512, 42), oracle::hashed("blue car", 512, 42));
    CHECK(near > far);
    auto a = e.embed_one("red fox");
    auto b = e.embed_one("red fox dog");
    double dot = 0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    CHECK(std::abs(dot - near) < 1e-12);

    CHECK(HashedEmbedder(512, 43).embed_one("red fox") != a);
    CHECK_THROWS_AS(HashedEmbedder(4, 1), std::invalid_argument);
}

TEST_CASE("vector store basics") {
    VectorStore store(3);
    store.add("a", {{"BRAND", "X"}}, std::vector<double>{1, 0, 0});
    store.add("b", {{"BRAND", "Y"}}, std::vector<double>{0, 2, 0});
    store.add("c", {{"BRAND", "Y"}}, std::vector<double>{1, 1, 0});
    CHECK(l2_norm(store.vector(1)) == doctest::Approx(1.0));
    CHECK_THROWS_AS(store.add("d", {}, std::vector<double>{1, 0}), DimensionMismatch);
    CHECK_THROWS_AS(store.add("a", {}, std::vector<double>{1, 0, 0}), IngestError);

    std::vector<double> q{1, 0.1, 0};
    auto all = store.knn(q, 10);
    REQUIRE(all.size() == 3);
    CHECK(all[0].id == "a");
    auto universal = FilterExpr::universal();
    CHECK(store.knn(q, 10, &universal) == all);

    FilterExpr only_b;
    only_b.add("BRAND", Eq{Scalar{"Y"}});
    FilterExpr exact;
    exact.add("BRAND", Eq{Scalar{"X"}});
    auto one = store.knn(std::vector<double>{0, 1, 0}, 5, &exact);
    REQUIRE(one.size() == 1);
    CHECK(one[0].id == "a");

    CHECK_THROWS_AS(store.knn(q, 0), std::invalid_argument);
    CHECK_THROWS_AS(store.knn(std::vector<double>{1, 0}, 1), DimensionMismatch);
    CHECK_THROWS_AS(store.knn(std::vector<double>{0, 0, 0}, 1), ZeroVectorError);

    auto copy = VectorStore::deserialize(store.serialize());
    CHECK(copy.serialize() == store.serialize());
    CHECK(copy.knn(q, 10, &only_b) == store.knn(q, 10, &only_b));
}

TEST_CASE("ties break by ascending id") {
    VectorStore store(2);
    for (const char* id : {"m", "c", "x", "a"}) store.add(id, {}, std::vector<double>{1, 1});
    auto hits = store.knn(std::vector<double>{1, 0}, 4);
    CHECK(hits[0].id == "a");
    CHECK(hits[1].id == "c");
    CHECK(hits[2].id == "m");
    CHECK(hits[3].id == "x");
}

TEST_CASE("knn equals brute force over random instances") {
    gen::Gen g(99);
    const std::size_t dim = 16;
    VectorStore store(dim);
    std::vector<oracle::Item> items;
    for (int i = 0; i < 50; ++i) {
        auto rec = g.record("id" + std::to_string(i));
        auto v = g.vec(dim);
        store.add(rec.id, rec.attrs, v);
        items.push_back({rec.id, gen::attrs_json(rec), v});
    }
    for (int t = 0; t < 60; ++t) {
        auto f = g.filter();
        auto q = g.vec(dim);
        auto got = store.knn(q, 10, &f);
        auto want = oracle::brute_knn(items, q, 10, f.to_json());
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].id == want[i].first);
            CHECK(std::abs(got[i].score - want[i].second) < 1e-12);
            CHECK(got[i].score <= 1.0 + 1e-12);
            CHECK(got[i].score >= -1.0 - 1e-12);
        }
        // every result satisfies the filter
        for (const auto& hit : got) {
            auto it = std::find_if(items.begin(), items.end(), [&](const auto& x) { return x.id == hit.id; });
            CHECK(oracle::brute_force_matches(f.to_json(), it->attrs));
        }
        // top-k is a prefix of top-(k+1)
        for (std::size_t k = 1; k < 12; ++k) {
            auto small = store.knn(q, k, &f);
            auto big = store.knn(q, k + 1, &f);
            REQUIRE(small.size() <= big.size());
            CHECK(std::equal(small.begin(), small.end(), big.begin()));
        }
    }
}

TEST_CASE("store files") {
    auto path = (std::filesystem::temp_directory_path() / "hyst_store_test.bin").string();
    VectorStore store(2);
    store.add("a", {{"PRICE", 3.0}, {"CATEGORY", std::vector<std::string>{"x", "y"}}}, std::vector<double>{3, 4});
    store.save(path);
    auto back = VectorStore::load(path);
    CHECK(back.size() == 1);
    CHECK(back.attrs(0) == store.attrs(0));
    CHECK(back.vector(0)[0] == doctest::Approx(0.6));
    std::filesystem::remove(path);
    CHECK_THROWS_AS(VectorStore::load(path), IoError);
}
