#pragma once

#include "hyst/pipeline.hpp"
#include "hyst/ranking.hpp"

#include <functional>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace hyst {

inline constexpr std::size_t kMaxRelevantPerQuery = 20;

// Binary judgments: query id -> relevant doc ids. Every query has 1..20 relevant docs.
struct Qrels {
    std::map<std::string, std::set<std::string>> judgments;

    // TSV "query_id <tab> doc_id", one judgment per line.
    static Qrels parse(std::istream& in);
    static Qrels load(const std::string& path);
};

struct Query {
    std::string id;
    std::string text;
};

// TSV "query_id <tab> query text".
std::vector<Query> parse_queries(std::istream& in);
std::vector<Query> load_queries(const std::string& path);

// |relevant ∩ top-k| / k, denominator k even when fewer results exist.
double precision_at_k(std::span<const std::string> ranked, const std::set<std::string>& relevant, std::size_t k);
// |relevant ∩ top-k| / |relevant|; throws std::invalid_argument on an empty relevant set.
double recall_at_k(std::span<const std::string> ranked, const std::set<std::string>& relevant, std::size_t k);
double reciprocal_rank(std::span<const std::string> ranked, const std::set<std::string>& relevant);
// Mean reciprocal rank over qrels queries; a query without a run counts 0.
double mrr(const std::map<std::string, std::vector<std::string>>& runs, const Qrels& qrels);

struct Metrics {
    double p1 = 0;
    double p5 = 0;
    double p10 = 0;
    double r20 = 0;
    double mrr = 0;
    bool operator==(const Metrics&) const = default;
};

inline constexpr const char* kMetricNames[] = {"P@1", "P@5", "P@10", "R@20", "MRR"};

struct QueryMetrics {
    std::string query_id;
    Metrics metrics;  // mrr holds the query's reciprocal rank
    bool operator==(const QueryMetrics&) const = default;
};

struct MetricRow {
    std::string label;
    std::string method;
    Metrics metrics;
    std::vector<std::string> best;  // metric names where this row holds the column maximum
    std::vector<QueryMetrics> per_query;
    bool operator==(const MetricRow&) const = default;
};

struct EvalReport {
    std::size_t query_count = 0;
    std::size_t depth = 0;
    std::vector<MetricRow> rows;

    nlohmann::ordered_json to_json() const;
    static EvalReport from_json(const nlohmann::json& j);
    std::string to_table() const;
    bool operator==(const EvalReport&) const = default;
};

// One evaluated arm. `runner` returns at least `depth` results when available.
struct MethodSpec {
    std::string label;
    std::string method;
    std::function<RankedList(const Query&, std::size_t depth)> runner;
};

struct EvalRun {
    EvalReport report;
    std::string run_file;  // trec-run-like TSV of every arm's results
};

// Runs every arm over every query at depth max(20, min_depth), macro-averages the five
// metrics and orders rows bm25, dense, bm25+dense, rrf, linearized, hyst, others last.
// Throws Error naming the query on a failed run or a query/qrels mismatch.
EvalRun compare_runs(std::span<const MethodSpec> methods, std::span<const Query> queries, const Qrels& qrels,
                     std::size_t min_depth = 20, std::size_t jobs = 1);

std::vector<MethodSpec> engine_methods(const Engine& engine, std::span<const MethodConfig> configs);

EvalRun compare(const Engine& engine, std::span<const MethodConfig> configs, std::span<const Query> queries,
                const Qrels& qrels, std::size_t jobs = 1);

// HyST with refinement on ("full") and off ("w/o query refinement").
EvalRun ablate_refine(const Engine& engine, std::span<const Query> queries, const Qrels& qrels, std::size_t k = 20,
                      std::size_t jobs = 1);

// Every mismatch between query ids and qrels ids; empty when they agree.
std::vector<std::string> query_qrels_mismatches(std::span<const Query> queries, const Qrels& qrels);

}  // namespace hyst
