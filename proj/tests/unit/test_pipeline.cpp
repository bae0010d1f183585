#include "doctest.h"

#include "hyst/error.hpp"
#include "hyst/pipeline.hpp"
#include "oracles/generators.hpp"
#include "oracles/knn_oracle.hpp"
#include "oracles/table_embedder.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

using namespace hyst;

namespace {

Schema paintball_schema() {
    return Schema({{"BRAND", ColumnKind::Single, std::vector<std::string>{"Spyder", "3Skull", "Tippmann"}},
                   {"CATEGORY", ColumnKind::Multiple, std::vector<std::string>{"paintball", "airsoft"}}});
}

const std::string kSpyderQuery = "Spyder paintball gun that is light and accurate";

struct Adversarial {
    Schema schema = paintball_schema();
    std::vector<Record> records;
    std::shared_ptr<oracle::TableEmbedder> embedder;
};

// The 3Skull item is nearest to the query globally; the Spyder item is nearest within the brand.
Adversarial adversarial_fixture() {
    Adversarial a;
    a.records = {
        {"skull", {{"BRAND", "3Skull"}, {"CATEGORY", std::vector<std::string>{"paintball"}}}, "3Skull light accurate gun", {}},
        {"spyder", {{"BRAND", "Spyder"}, {"CATEGORY", std::vector<std::string>{"paintball"}}}, "Spyder marker kit", {}},
        {"tipp", {{"BRAND", "Tippmann"}, {"CATEGORY", std::vector<std::string>{"airsoft"}}}, "Tippmann airsoft rifle", {}},
    };
    std::map<std::string, Vector> table;
    table[kSpyderQuery] = {1, 0, 0, 0, 0, 0, 0, 0};
    const std::vector<Vector> vecs = {{0.95, 0.3, 0, 0, 0, 0, 0, 0}, {0.6, 0.8, 0, 0, 0, 0, 0, 0}, {0, 0, 1, 0, 0, 0, 0, 0}};
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        table[a.records[i].text] = vecs[i];
        table[linearize(a.records[i], a.schema)] = vecs[i];
    }
    a.embedder = std::make_shared<oracle::TableEmbedder>(8, table);
    return a;
}

Engine rules_engine(const Schema& schema, std::vector<Record> records, std::shared_ptr<const EmbeddingProvider> e) {
    return Engine::build(schema, std::move(records), std::move(e), std::make_shared<RulePlanner>(schema));
}

}  // namespace

TEST_CASE("method names") {
    for (auto m : kAllMethods) CHECK(parse_method(method_id(m)) == m);
    CHECK(method_id(Method::Bm25Dense) == "bm25+dense");
    CHECK(method_display(Method::Hyst) == "HyST");
    CHECK_FALSE(parse_method("colbert"));

    MethodConfig c;
    c.k = 0;
    CHECK_THROWS_AS(check_method_config(c), std::invalid_argument);
    c.k = 5;
    c.lambda = 0.3;
    CHECK_THROWS_AS(check_method_config(c), std::invalid_argument);
    c.method = Method::Bm25Dense;
    CHECK_NOTHROW(check_method_config(c));
}

TEST_CASE("hard constraint beats the embedding-nearest record") {
    auto a = adversarial_fixture();
    auto engine = rules_engine(a.schema, a.records, a.embedder);

    auto hyst = engine.run_hyst(kSpyderQuery, {Method::Hyst, 3});
    REQUIRE_FALSE(hyst.results.empty());
    CHECK(hyst.results.items[0].id == "spyder");
    for (const auto& hit : hyst.results.items) CHECK(matches(hyst.plan->filter, *engine.find_record(hit.id)));

    auto lin = engine.run_baseline(kSpyderQuery, {Method::Linearized, 3});
    CHECK(lin.items[0].id == "skull");
    CHECK(engine.dense_over_text(kSpyderQuery, 3).items[0].id == "skull");
}

TEST_CASE("universal filter reduces to dense search over record text") {
    auto a = adversarial_fixture();
    auto engine = rules_engine(a.schema, a.records, a.embedder);
    for (const char* q : {"light and accurate", "rifle for beginners", "kit"}) {
        auto out = engine.run_hyst(q, {Method::Hyst, 3});
        CHECK(out.plan->filter.is_universal());
        CHECK(out.results.items == engine.dense_over_text(q, 3).items);
    }
}

TEST_CASE("filter starvation") {
    auto a = adversarial_fixture();
    auto engine = rules_engine(a.schema, a.records, a.embedder);
    const char* q = "Tippmann paintball gear";
    auto strict = engine.run_hyst(q, {Method::Hyst, 3});
    CHECK(strict.results.empty());
    CHECK(strict.starved);
    CHECK_FALSE(strict.relaxed);

    MethodConfig relax{Method::Hyst, 3};
    relax.relax = true;
    auto relaxed = engine.run_hyst(q, relax);
    CHECK(relaxed.starved);
    CHECK(relaxed.relaxed);
    CHECK(relaxed.results.size() == 3);
}

TEST_CASE("hyst on random records equals the composed oracle") {
    auto schema = gen::schema();
    gen::Gen g(2025);
    const char* words[] = {"warm", "light", "sturdy", "classic", "soft", "bright", "quiet", "fast"};
    std::vector<Record> records;
    for (int i = 0; i < 20; ++i) {
        auto r = g.record("r" + std::to_string(100 + i));
        r.text.clear();
        for (int w = 0; w < 6; ++w) r.text += std::string(words[g.below(8)]) + " ";
        records.push_back(r);
    }
    auto embedder = std::make_shared<HashedEmbedder>(64, 3);
    std::vector<oracle::Item> items;
    for (const auto& r : records) items.push_back({r.id, gen::attrs_json(r), embedder->embed_one(r.text)});

    for (int t = 0; t < 25; ++t) {
        auto f = g.filter();
        auto script = std::make_shared<ScriptedLLMClient>(std::vector<ScriptedLLMClient::Entry>{{"", f.dump()}});
        auto engine = Engine::build(schema, records, embedder, std::make_shared<LlmPlanner>(script, schema));
        const std::string q = std::string(words[g.below(8)]) + " " + words[g.below(8)];
        auto out = engine.run_hyst(q, {Method::Hyst, 5});
        auto want = oracle::brute_knn(items, embedder->embed_one(q), 5, f.to_json());
        REQUIRE(out.results.size() == want.size());
        for (std::size_t i = 0; i < want.size(); ++i) {
            CHECK(out.results.items[i].id == want[i].first);
            CHECK(std::abs(out.results.items[i].score - want[i].second) < 1e-12);
        }
        CHECK(out.starved == (want.empty() && !f.is_universal()));
    }
}

TEST_CASE("bm25+dense on a three-document fixture") {
    Schema schema({{"BRAND", ColumnKind::Single, std::vector<std::string>{"A", "B"}}});
    std::vector<Record> records = {{"x", {{"BRAND", "A"}}, "red fox runs", {}},
                                   {"y", {{"BRAND", "B"}}, "red red barn", {}},
                                   {"z", {}, "blue sky", {}}};
    auto embedder = std::make_shared<HashedEmbedder>(32, 9);
    auto engine = rules_engine(schema, records, embedder);
    const std::string q = "red fox";

    std::vector<TextDoc> lin;
    std::vector<oracle::Item> items;
    for (const auto& r : records) {
        lin.push_back({r.id, linearize(r, schema)});
        items.push_back({r.id, nlohmann::json::object(), embedder->embed_one(linearize(r, schema))});
    }
    auto sparse = build_index(lin).search(q, 10);
    auto dense = oracle::brute_knn(items, embedder->embed_one(q), 10, nlohmann::ordered_json::object());
    auto norm = [](std::map<std::string, double> m) {
        double lo = 1e300, hi = -1e300;
        for (auto& [k, v] : m) lo = std::min(lo, v), hi = std::max(hi, v);
        for (auto& [k, v] : m) v = hi > lo ? (v - lo) / (hi - lo) : 1.0;
        return m;
    };
    std::map<std::string, double> s, d;
    for (const auto& h : sparse) s[h.id] = h.score;
    for (const auto& [id, score] : dense) d[id] = score;
    s = norm(s);
    d = norm(d);
    MethodConfig cfg{Method::Bm25Dense, 10};
    cfg.lambda = 0.5;
    auto fused = engine.run_baseline(q, cfg);
    REQUIRE(fused.size() == 3);
    for (const auto& item : fused.items) {
        const double want = 0.5 * (s.count(item.id) ? s[item.id] : 0.0) + 0.5 * (d.count(item.id) ? d[item.id] : 0.0);
        CHECK(std::abs(item.score - want) < 1e-12);
    }
    CHECK(engine.run_baseline(q, {Method::Dense, 50}).size() == 3);
    CHECK(engine.run_baseline(q, {Method::Bm25, 1}).size() == 1);
    CHECK(engine.run_baseline(q, {Method::Rrf, 10}).size() == 3);
}

TEST_CASE("engine persistence and determinism") {
    auto a = adversarial_fixture();
    auto planner = std::make_shared<RulePlanner>(a.schema);
    BuildStats stats;
    auto engine = Engine::build(a.schema, a.records, a.embedder, planner, {}, &stats);
    CHECK(stats.records == 3);
    auto dir = (std::filesystem::temp_directory_path() / "hyst_engine_test").string();
    std::filesystem::remove_all(dir);
    engine.save(dir);
    for (auto name : {kRecordsFile, kBm25File, kTextVectorsFile, kLinearVectorsFile}) {
        CHECK(std::filesystem::exists(std::filesystem::path(dir) / name));
    }
    auto loaded = Engine::load(dir, a.schema, a.embedder, planner);
    CHECK(loaded.records() == engine.records());
    for (auto m : kAllMethods) {
        MethodConfig c{m, 3};
        CHECK(loaded.run(kSpyderQuery, c).results == engine.run(kSpyderQuery, c).results);
        CHECK(engine.run(kSpyderQuery, c).results == engine.run(kSpyderQuery, c).results);
    }
    CHECK_THROWS_AS(Engine::load(dir, a.schema, std::make_shared<HashedEmbedder>(16, 1), planner), DimensionMismatch);
    std::filesystem::remove_all(dir);
    CHECK_THROWS_AS(Engine::load(dir, a.schema, a.embedder, planner), Error);

    std::ostringstream run;
    write_run(run, "q1", RankedList{{{"a", 0.5}, {"b", 0.25}}, "x"}, "hyst");
    CHECK(run.str() == "q1\ta\t1\t0.5\thyst\nq1\tb\t2\t0.25\thyst\n");
}
