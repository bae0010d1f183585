#pragma once

#include "hyst/corpus.hpp"
#include "hyst/dense.hpp"
#include "hyst/filter.hpp"
#include "hyst/fusion.hpp"
#include "hyst/lexical.hpp"
#include "hyst/planner.hpp"
#include "hyst/ranking.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hyst {

enum class Method { Bm25, Dense, Bm25Dense, Rrf, Linearized, Hyst };

inline constexpr Method kAllMethods[] = {Method::Bm25, Method::Dense, Method::Bm25Dense,
                                         Method::Rrf, Method::Linearized, Method::Hyst};

std::string_view method_id(Method m);       // "bm25", "bm25+dense", ...
std::string_view method_display(Method m);  // "BM25", "BM25+Dense", ...
std::optional<Method> parse_method(std::string_view id);

struct MethodConfig {
    Method method = Method::Hyst;
    std::size_t k = 10;
    std::optional<double> lambda;  // bm25+dense only
    bool refine = false;           // hyst only
    bool relax = false;            // hyst only: retry with the universal filter on starvation
    std::string label;             // report label; defaults to method_display()

    std::string display_label() const;
};

// Throws std::invalid_argument when k < 1 or lambda is present for anything but bm25+dense.
void check_method_config(const MethodConfig& config);

struct EngineOptions {
    Bm25Params bm25;
    int rrf_c = kDefaultRrfConstant;
    // Per-source candidate depth fed into interpolation and RRF (never below k).
    std::size_t fusion_depth = 100;
};

struct BuildStats {
    std::size_t records = 0;
    std::vector<std::string> warnings;
};

struct SearchOutcome {
    RankedList results;
    std::optional<QueryPlan> plan;
    bool starved = false;
    bool relaxed = false;
    std::vector<std::string> warnings;
};

inline constexpr std::string_view kRecordsFile = "records.jsonl";
inline constexpr std::string_view kBm25File = "bm25_linearized.bin";
inline constexpr std::string_view kTextVectorsFile = "vectors_text.bin";
inline constexpr std::string_view kLinearVectorsFile = "vectors_linearized.bin";

// Owns every index the retrieval methods need: the record store, BM25 over linearized
// records, and two vector stores (record text for HyST, linearized records for the
// baselines). Immutable after build; run() may be called concurrently.
class Engine {
public:
    static Engine build(Schema schema, std::vector<Record> records, std::shared_ptr<const EmbeddingProvider> embedder,
                        std::shared_ptr<const Planner> planner, EngineOptions options = {}, BuildStats* stats = nullptr);
    static Engine load(const std::string& index_dir, Schema schema, std::shared_ptr<const EmbeddingProvider> embedder,
                       std::shared_ptr<const Planner> planner, EngineOptions options = {});
    void save(const std::string& index_dir) const;

    SearchOutcome run(std::string_view query, const MethodConfig& config) const;
    SearchOutcome run_hyst(std::string_view query, const MethodConfig& config) const;
    RankedList run_baseline(std::string_view query, const MethodConfig& config) const;
    // Unfiltered cosine search over record-text embeddings.
    RankedList dense_over_text(std::string_view query, std::size_t k) const;

    const Schema& schema() const { return schema_; }
    const std::vector<Record>& records() const { return records_; }
    const Record* find_record(std::string_view id) const;
    const InvertedIndex& bm25_index() const { return bm25_; }
    const VectorStore& text_store() const { return text_store_; }
    const VectorStore& linear_store() const { return linear_store_; }
    const EmbeddingProvider& embedder() const { return *embedder_; }
    const Planner& planner() const { return *planner_; }
    const EngineOptions& options() const { return options_; }

private:
    Engine() = default;
    std::vector<ScoredDoc> dense_search(const VectorStore& store, std::string_view text, std::size_t k,
                                        const FilterExpr* filter, std::vector<std::string>* warnings) const;
    void index_records();

    Schema schema_;
    std::vector<Record> records_;
    std::unordered_map<std::string, std::size_t> by_id_;
    InvertedIndex bm25_;
    VectorStore text_store_;
    VectorStore linear_store_;
    std::shared_ptr<const EmbeddingProvider> embedder_;
    std::shared_ptr<const Planner> planner_;
    EngineOptions options_;
};

// "query_id \t doc_id \t rank \t score \t method", rank starting at 1.
void write_run(std::ostream& out, std::string_view query_id, const RankedList& list, std::string_view method);

}  // namespace hyst
