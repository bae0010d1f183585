#pragma once

#include "hyst/corpus.hpp"
#include "hyst/eval.hpp"

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

namespace hyst {

// A generated product catalog with hybrid queries and relevance judgments.
// Rows are the raw corpus JSONL objects; records are those rows ingested.
struct SyntheticBenchmark {
    Schema schema;
    std::vector<nlohmann::json> rows;
    std::vector<Record> records;
    std::vector<Query> queries;
    Qrels qrels;
    // Queries whose catalog holds a wrong-brand record written to echo the query text.
    std::set<std::string> adversarial;
};

inline const std::vector<std::string> kSyntheticTextFields = {"title", "description", "reviews"};

struct SyntheticOptions {
    std::uint64_t seed = 7;
    std::size_t queries = 30;
    std::size_t filler_records = 120;
    // Every n-th query is adversarial (n = 2 -> half).
    std::size_t adversarial_every = 2;
    // Every n-th query adds a price ceiling; 0 disables.
    std::size_t price_every = 3;
};

SyntheticBenchmark make_synthetic_benchmark(const SyntheticOptions& options = {});

// 10 queries over 50 records. For each query the record whose text most closely echoes the
// query carries the wrong brand, while exactly one record satisfies brand and category and
// leads among those that do.
SyntheticBenchmark make_case_study(std::uint64_t seed = 11);

// Writes schema.json, corpus.jsonl, queries.tsv, qrels.tsv and config.json into dir.
void write_benchmark(const SyntheticBenchmark& bench, const std::string& dir);

}  // namespace hyst
