#include "doctest.h"
#include "json.hpp"

#include "hyst/error.hpp"
#include "hyst/eval.hpp"
#include "hyst/synthetic.hpp"

#include <cmath>
#include <sstream>

using namespace hyst;

namespace {

using Ids = std::vector<std::string>;

MethodSpec fixed(std::string label, std::string method, std::map<std::string, Ids> runs) {
    return {std::move(label), std::move(method), [runs = std::move(runs)](const Query& q, std::size_t) {
                RankedList out;
                auto it = runs.find(q.id);
                if (it == runs.end()) return out;
                double score = static_cast<double>(it->second.size());
                for (const auto& id : it->second) out.items.push_back({id, score--});
                return out;
            }};
}

Qrels qrels_from(const std::string& tsv) {
    std::istringstream in(tsv);
    return Qrels::parse(in);
}

}  // namespace

TEST_CASE("scalar metrics") {
    const Ids abc = {"a", "b", "c"};
    const std::set<std::string> ac = {"a", "c"};
    CHECK(precision_at_k(abc, ac, 1) == 1.0);
    CHECK(precision_at_k(abc, ac, 5) == 0.4);
    CHECK(precision_at_k({}, ac, 5) == 0.0);
    CHECK(recall_at_k(abc, ac, 20) == 1.0);
    CHECK(recall_at_k(Ids{"a"}, {"a", "b", "c"}, 20) == 1.0 / 3.0);
    CHECK(recall_at_k(Ids{"x"}, ac, 20) == 0.0);
    CHECK_THROWS_AS(recall_at_k(abc, {}, 20), std::invalid_argument);
    CHECK(reciprocal_rank(Ids{"x", "y", "z", "a"}, ac) == 0.25);

    auto qrels = qrels_from("q1\ta\nq2\ta\n");
    CHECK(mrr({{"q1", {"a"}}, {"q2", {"x", "y", "z", "a"}}}, qrels) == 0.625);
    CHECK(mrr({{"q1", {"a"}}}, qrels_from("q1\ta\n")) == 1.0);
    CHECK(mrr({{"q1", {"x"}}, {"q2", {}}}, qrels) == 0.0);
    CHECK(mrr({{"q1", {"a"}}}, qrels) == 0.5);
}

TEST_CASE("metric monotonicity and relabeling") {
    const Ids ranked = {"d3", "d9", "d1", "d4", "d7", "d2", "d8"};
    const std::set<std::string> rel = {"d1", "d2", "d5"};
    for (std::size_t k = 1; k < 10; ++k) {
        CHECK(recall_at_k(ranked, rel, k + 1) >= recall_at_k(ranked, rel, k));
    }
    // precision only falls once every relevant retrieved document is inside the cutoff
    CHECK(precision_at_k(ranked, rel, 7) >= precision_at_k(ranked, rel, 8));
    CHECK(precision_at_k(ranked, rel, 8) >= precision_at_k(ranked, rel, 20));

    auto relabel = [](const std::string& id) { return "x" + id + "y"; };
    Ids ranked2;
    std::set<std::string> rel2;
    for (const auto& id : ranked) ranked2.push_back(relabel(id));
    for (const auto& id : rel) rel2.insert(relabel(id));
    for (std::size_t k : {1, 5, 10, 20}) {
        CHECK(precision_at_k(ranked, rel, k) == precision_at_k(ranked2, rel2, k));
        CHECK(recall_at_k(ranked, rel, k) == recall_at_k(ranked2, rel2, k));
    }
    CHECK(reciprocal_rank(ranked, rel) == reciprocal_rank(ranked2, rel2));
}

TEST_CASE("qrels and queries files") {
    CHECK(qrels_from("q1\ta\nq1\tb\r\n\nq2\tc\n").judgments.at("q1").size() == 2);
    CHECK_THROWS_AS(qrels_from("q1 a\n"), ParseError);
    std::string many;
    for (int i = 0; i < 21; ++i) many += "q1\td" + std::to_string(i) + "\n";
    CHECK_THROWS_AS(qrels_from(many), ParseError);

    std::istringstream qs("q1\tred fox\tlazy\nq2\tblue\n");
    auto queries = parse_queries(qs);
    REQUIRE(queries.size() == 2);
    CHECK(queries[0].text == "red fox\tlazy");
    std::istringstream dup("q1\ta\nq1\tb\n");
    CHECK_THROWS_AS(parse_queries(dup), ParseError);

    auto problems = query_qrels_mismatches(queries, qrels_from("q1\ta\nq3\tb\n"));
    CHECK(problems.size() == 2);
}

TEST_CASE("one method and one query reduces to the scalar operations") {
    auto qrels = qrels_from("q\ta\nq\tc\n");
    std::vector<Query> queries = {{"q", "text"}};
    std::vector<MethodSpec> methods = {fixed("X", "x", {{"q", {"b", "a", "c"}}})};
    auto run = compare_runs(methods, queries, qrels);
    const auto& m = run.report.rows.at(0).metrics;
    const Ids ranked = {"b", "a", "c"};
    const auto& rel = qrels.judgments.at("q");
    CHECK(m.p1 == precision_at_k(ranked, rel, 1));
    CHECK(m.p5 == precision_at_k(ranked, rel, 5));
    CHECK(m.p10 == precision_at_k(ranked, rel, 10));
    CHECK(m.r20 == recall_at_k(ranked, rel, 20));
    CHECK(m.mrr == reciprocal_rank(ranked, rel));
    CHECK(run.run_file == "q\tb\t1\t3\tx:X\nq\ta\t2\t2\tx:X\nq\tc\t3\t1\tx:X\n");
}

TEST_CASE("perfect method saturates") {
    auto qrels = qrels_from("q1\ta\nq1\tb\nq2\tc\nq3\td\nq3\te\nq3\tf\nq3\tg\nq3\th\nq3\ti\n");
    std::vector<Query> queries = {{"q1", ""}, {"q2", ""}, {"q3", ""}};
    std::map<std::string, Ids> perfect;
    for (const auto& [q, docs] : qrels.judgments) perfect[q] = Ids(docs.begin(), docs.end());
    std::vector<MethodSpec> methods = {fixed("Oracle", "oracle", perfect)};
    auto m = compare_runs(methods, queries, qrels).report.rows[0].metrics;
    CHECK(m.p1 == 1.0);
    CHECK(m.r20 == 1.0);
    CHECK(m.mrr == 1.0);
    CHECK(std::abs(m.p5 - (2.0 / 5 + 1.0 / 5 + 1.0) / 3) < 1e-15);
    CHECK(std::abs(m.p10 - (2.0 / 10 + 1.0 / 10 + 6.0 / 10) / 3) < 1e-15);
}

TEST_CASE("report ordering, flags and serialization") {
    auto qrels = qrels_from("q1\ta\nq2\tb\n");
    std::vector<Query> queries = {{"q1", ""}, {"q2", ""}};
    std::vector<MethodSpec> methods = {
        fixed("HyST", "hyst", {{"q1", {"a"}}, {"q2", {"b"}}}),
        fixed("Mine", "custom", {{"q1", {"a"}}}),
        fixed("BM25", "bm25", {{"q1", {"z", "a"}}, {"q2", {"b"}}}),
        fixed("Linearized", "linearized", {{"q1", {"z"}}}),
    };
    auto run = compare_runs(methods, queries, qrels, 20, 3);
    const auto& rows = run.report.rows;
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].method == "bm25");
    CHECK(rows[1].method == "linearized");
    CHECK(rows[2].method == "hyst");
    CHECK(rows[3].method == "custom");
    CHECK(rows[2].best.size() == 5);
    CHECK(rows[3].best.empty());
    CHECK(rows[0].best == std::vector<std::string>{"P@5", "P@10", "R@20"});

    auto j = run.report.to_json();
    auto back = EvalReport::from_json(nlohmann::json::parse(j.dump()));
    CHECK(back == run.report);
    CHECK(back.to_json().dump() == j.dump());
    auto table = run.report.to_table();
    CHECK(table.find("HyST") != std::string::npos);
    CHECK(table.find('*') != std::string::npos);

    auto serial = compare_runs(methods, queries, qrels, 20, 1);
    CHECK(serial.run_file == run.run_file);
    CHECK(serial.report == run.report);
}

TEST_CASE("failures name the query") {
    auto qrels = qrels_from("q1\ta\n");
    std::vector<Query> queries = {{"q1", ""}};
    std::vector<MethodSpec> bad = {{"Bad", "bad", [](const Query&, std::size_t) -> RankedList {
                                        throw std::runtime_error("boom");
                                    }}};
    try {
        compare_runs(bad, queries, qrels);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("q1") != std::string::npos);
    }
    std::vector<Query> extra = {{"q1", ""}, {"q9", ""}};
    CHECK_THROWS_AS(compare_runs(bad, extra, qrels), Error);
}

TEST_CASE("hyst beats the linearized baseline on adversarial queries") {
    auto bench = make_synthetic_benchmark();
    auto schema = bench.schema;
    auto engine = Engine::build(schema, bench.records, std::make_shared<HashedEmbedder>(512, 42),
                                std::make_shared<RulePlanner>(schema));
    std::vector<Query> adversarial;
    Qrels sub;
    for (const auto& q : bench.queries) {
        if (!bench.adversarial.count(q.id)) continue;
        adversarial.push_back(q);
        sub.judgments[q.id] = bench.qrels.judgments.at(q.id);
    }
    REQUIRE(adversarial.size() >= 10);
    std::vector<MethodConfig> configs = {{Method::Linearized, 10}, {Method::Hyst, 10}};
    auto report = compare(engine, configs, adversarial, sub).report;
    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[1].method == "hyst");
    CHECK(report.rows[1].metrics.p1 > report.rows[0].metrics.p1);

    auto ablation = ablate_refine(engine, bench.queries, bench.qrels, 10);
    REQUIRE(ablation.report.rows.size() == 2);
    CHECK(ablation.report.rows[0].label == "full");
    CHECK(ablation.report.rows[1].label == "w/o query refinement");
}
