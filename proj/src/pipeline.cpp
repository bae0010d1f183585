#include "hyst/pipeline.hpp"

#include "hyst/error.hpp"
#include "hyst/text.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace hyst {

namespace fs = std::filesystem;

std::string_view method_id(Method m) {
    switch (m) {
        case Method::Bm25: return "bm25";
        case Method::Dense: return "dense";
        case Method::Bm25Dense: return "bm25+dense";
        case Method::Rrf: return "rrf";
        case Method::Linearized: return "linearized";
        case Method::Hyst: return "hyst";
    }
    return "hyst";
}

std::string_view method_display(Method m) {
    switch (m) {
        case Method::Bm25: return "BM25";
        case Method::Dense: return "Dense";
        case Method::Bm25Dense: return "BM25+Dense";
        case Method::Rrf: return "RRF";
        case Method::Linearized: return "Linearized";
        case Method::Hyst: return "HyST";
    }
    return "HyST";
}

std::optional<Method> parse_method(std::string_view id) {
    for (auto m : kAllMethods) {
        if (iequals(method_id(m), id)) return m;
    }
    return std::nullopt;
}

std::string MethodConfig::display_label() const {
    return label.empty() ? std::string(method_display(method)) : label;
}

void check_method_config(const MethodConfig& config) {
    if (config.k < 1) throw std::invalid_argument("k must be >= 1");
    if (config.lambda && config.method != Method::Bm25Dense) {
        throw std::invalid_argument("lambda only applies to bm25+dense");
    }
    if (config.lambda && !(*config.lambda >= 0.0 && *config.lambda <= 1.0)) {
        throw std::invalid_argument("lambda must lie in [0, 1]");
    }
}

void Engine::index_records() {
    by_id_.clear();
    for (std::size_t i = 0; i < records_.size(); ++i) {
        if (!by_id_.emplace(records_[i].id, i).second) throw IngestError("duplicate id " + records_[i].id);
    }
}

Engine Engine::build(Schema schema, std::vector<Record> records, std::shared_ptr<const EmbeddingProvider> embedder,
                     std::shared_ptr<const Planner> planner, EngineOptions options, BuildStats* stats) {
    Engine e;
    e.schema_ = std::move(schema);
    e.records_ = std::move(records);
    e.embedder_ = std::move(embedder);
    e.planner_ = std::move(planner);
    e.options_ = options;
    e.index_records();

    const auto dim = e.embedder_->dimension();
    std::vector<std::string> linearized;
    std::vector<TextDoc> docs;
    std::vector<std::string> texts;
    std::vector<std::size_t> to_embed;
    linearized.reserve(e.records_.size());
    for (std::size_t i = 0; i < e.records_.size(); ++i) {
        const auto& r = e.records_[i];
        linearized.push_back(linearize(r, e.schema_));
        docs.push_back({r.id, linearized.back()});
        if (!r.embedding) {
            texts.push_back(r.text);
            to_embed.push_back(i);
        }
    }
    e.bm25_ = InvertedIndex::build(docs, options.bm25);

    BuildStats local;
    auto& st = stats ? *stats : local;
    st.records = e.records_.size();

    auto text_vectors = e.embedder_->embed(texts);
    auto linear_vectors = e.embedder_->embed(linearized);
    e.text_store_ = VectorStore(dim);
    e.linear_store_ = VectorStore(dim);
    std::size_t next = 0;
    for (std::size_t i = 0; i < e.records_.size(); ++i) {
        const auto& r = e.records_[i];
        const Vector& tv = r.embedding ? *r.embedding : text_vectors[next++];
        try {
            e.text_store_.add(r.id, r.attrs, tv);
        } catch (const ZeroVectorError&) {
            st.warnings.push_back("record " + r.id + ": empty text embedding, not searchable by hyst");
        }
        try {
            e.linear_store_.add(r.id, r.attrs, linear_vectors[i]);
        } catch (const ZeroVectorError&) {
            st.warnings.push_back("record " + r.id + ": empty linearized embedding");
        }
    }
    return e;
}

Engine Engine::load(const std::string& index_dir, Schema schema, std::shared_ptr<const EmbeddingProvider> embedder,
                    std::shared_ptr<const Planner> planner, EngineOptions options) {
    const fs::path dir(index_dir);
    for (auto name : {kRecordsFile, kBm25File, kTextVectorsFile, kLinearVectorsFile}) {
        if (!fs::exists(dir / name)) throw IoError("missing index artifact " + (dir / name).string() + " (run ingest)");
    }
    Engine e;
    e.schema_ = std::move(schema);
    e.embedder_ = std::move(embedder);
    e.planner_ = std::move(planner);
    e.options_ = options;
    std::ifstream in(dir / kRecordsFile);
    std::string line;
    while (std::getline(in, line)) {
        if (!trim(line).empty()) e.records_.push_back(record_from_json(nlohmann::json::parse(line)));
    }
    e.index_records();
    e.bm25_ = InvertedIndex::load((dir / kBm25File).string());
    e.text_store_ = VectorStore::load((dir / kTextVectorsFile).string());
    e.linear_store_ = VectorStore::load((dir / kLinearVectorsFile).string());
    e.options_.bm25 = e.bm25_.params();
    for (const auto* store : {&e.text_store_, &e.linear_store_}) {
        if (store->dimension() != e.embedder_->dimension()) {
            throw DimensionMismatch("index was built with " + std::to_string(store->dimension()) +
                                    "-dim vectors but the embedder produces " +
                                    std::to_string(e.embedder_->dimension()));
        }
    }
    return e;
}

void Engine::save(const std::string& index_dir) const {
    const fs::path dir(index_dir);
    fs::create_directories(dir);
    std::string records;
    for (const auto& r : records_) {
        records += record_to_json(r).dump();
        records += '\n';
    }
    write_file((dir / kRecordsFile).string(), records);
    bm25_.save((dir / kBm25File).string());
    text_store_.save((dir / kTextVectorsFile).string());
    linear_store_.save((dir / kLinearVectorsFile).string());
}

const Record* Engine::find_record(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    return it == by_id_.end() ? nullptr : &records_[it->second];
}

std::vector<ScoredDoc> Engine::dense_search(const VectorStore& store, std::string_view text, std::size_t k,
                                            const FilterExpr* filter, std::vector<std::string>* warnings) const {
    auto q = embedder_->embed_one(std::string(text));
    if (!(l2_norm(q) > 0)) {
        if (warnings) warnings->push_back("query has no embeddable content");
        return {};
    }
    return store.knn(q, k, filter);
}

SearchOutcome Engine::run_hyst(std::string_view query, const MethodConfig& config) const {
    check_method_config(config);
    SearchOutcome out;
    out.plan = planner_->plan(query, config.refine);
    const auto& plan = *out.plan;
    out.results.source = std::string(method_id(Method::Hyst));
    out.results.items = dense_search(text_store_, plan.refined_query, config.k, &plan.filter, &out.warnings);
    if (out.results.empty() && !plan.filter.is_universal()) {
        out.starved = true;
        out.warnings.push_back("filter matched no records");
        if (config.relax) {
            out.relaxed = true;
            out.results.items = dense_search(text_store_, plan.refined_query, config.k, nullptr, &out.warnings);
        }
    }
    return out;
}

RankedList Engine::dense_over_text(std::string_view query, std::size_t k) const {
    RankedList out;
    out.source = "dense-text";
    out.items = dense_search(text_store_, query, k, nullptr, nullptr);
    return out;
}

RankedList Engine::run_baseline(std::string_view query, const MethodConfig& config) const {
    check_method_config(config);
    const auto depth = std::max(config.k, options_.fusion_depth);
    RankedList out;
    out.source = std::string(method_id(config.method));
    switch (config.method) {
        case Method::Bm25:
            out.items = bm25_.search(query, config.k);
            break;
        case Method::Dense:
        case Method::Linearized:
            out.items = dense_search(linear_store_, query, config.k, nullptr, nullptr);
            break;
        case Method::Bm25Dense: {
            RankedList sparse{bm25_.search(query, depth), "bm25"};
            RankedList dense{dense_search(linear_store_, query, depth, nullptr, nullptr), "dense"};
            out.items = interpolate(sparse, dense, config.lambda.value_or(0.5), config.k).items;
            break;
        }
        case Method::Rrf: {
            std::vector<RankedList> lists{{bm25_.search(query, depth), "bm25"},
                                          {dense_search(linear_store_, query, depth, nullptr, nullptr), "dense"}};
            out.items = rrf(lists, options_.rrf_c, config.k).items;
            break;
        }
        case Method::Hyst:
            return run_hyst(query, config).results;
    }
    return out;
}

SearchOutcome Engine::run(std::string_view query, const MethodConfig& config) const {
    if (config.method == Method::Hyst) return run_hyst(query, config);
    SearchOutcome out;
    out.results = run_baseline(query, config);
    return out;
}

void write_run(std::ostream& out, std::string_view query_id, const RankedList& list, std::string_view method) {
    for (std::size_t i = 0; i < list.items.size(); ++i) {
        out << query_id << '\t' << list.items[i].id << '\t' << (i + 1) << '\t' << format_number(list.items[i].score)
            << '\t' << method << '\n';
    }
}

}  // namespace hyst
