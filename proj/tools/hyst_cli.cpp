// hyst: ingest a tabular corpus, inspect query plans, search, and evaluate retrieval methods.

#include "hyst/config.hpp"
#include "hyst/corpus.hpp"
#include "hyst/error.hpp"
#include "hyst/eval.hpp"
#include "hyst/pipeline.hpp"
#include "hyst/synthetic.hpp"
#include "hyst/text.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace {

using nlohmann::ordered_json;

struct GlobalOptions {
    std::string config = "hyst.json";
    std::string format = "table";
    std::size_t jobs = 1;
};

void diag(const std::string& msg) { std::cerr << "hyst: " << msg << '\n'; }

bool json_output(const GlobalOptions& g) { return g.format == "json"; }

hyst::Engine load_engine(const hyst::ProjectConfig& config) {
    auto schema = hyst::load_schema(config.schema);
    auto planner = hyst::make_planner(config, schema);
    return hyst::Engine::load(config.index_dir, schema, hyst::make_embedder(config), planner, config.engine_options());
}

std::string attrs_summary(const hyst::Schema& schema, const hyst::Record& r) {
    std::string out;
    for (const auto& col : schema.columns()) {
        auto it = r.attrs.find(col.name);
        if (it == r.attrs.end()) continue;
        if (!out.empty()) out += "; ";
        out += col.name + "=" + hyst::attr_to_string(it->second);
    }
    return out;
}

int cmd_ingest(const GlobalOptions& g) {
    auto config = hyst::ProjectConfig::load(g.config);
    auto schema = hyst::load_schema(config.schema);
    auto ingested = hyst::ingest(config.corpus, schema, config.text_fields);
    for (const auto& s : ingested.skipped) diag(config.corpus + ":" + std::to_string(s.line) + ": skipped: " + s.message);
    if (ingested.records.empty()) diag("warning: corpus produced no records");

    hyst::BuildStats stats;
    auto engine = hyst::Engine::build(schema, std::move(ingested.records), hyst::make_embedder(config),
                                      hyst::make_planner(config, schema), config.engine_options(), &stats);
    for (const auto& w : stats.warnings) diag("warning: " + w);
    engine.save(config.index_dir);

    if (json_output(g)) {
        std::cout << ordered_json{{"records", stats.records},
                                  {"skipped", ingested.skipped.size()},
                                  {"index_dir", config.index_dir}}
                         .dump(2)
                  << '\n';
    } else {
        std::cout << stats.records << " records, " << ingested.skipped.size() << " skipped\n";
    }
    diag("wrote 4 artifacts to " + config.index_dir);
    return 0;
}

int cmd_plan(const GlobalOptions& g, const std::string& query, std::optional<bool> refine_flag) {
    auto config = hyst::ProjectConfig::load(g.config);
    auto schema = hyst::load_schema(config.schema);
    auto planner = hyst::make_planner(config, schema);
    auto plan = planner->plan(query, refine_flag.value_or(config.defaults.refine));
    if (json_output(g)) {
        std::cout << plan.to_json().dump(2) << '\n';
        return 0;
    }
    std::cout << "filter: " << plan.filter.dump() << '\n';
    std::cout << "refined query: " << plan.refined_query << '\n';
    for (const auto& d : plan.validation.dropped_clauses) {
        std::cout << "dropped: " << d.column << " (" << d.reason << ")";
        if (!d.detail.empty()) std::cout << ": " << d.detail;
        std::cout << '\n';
    }
    for (const auto& c : plan.validation.value_corrections) {
        std::cout << "corrected: " << c.column << " " << c.raw << " -> " << c.matched << '\n';
    }
    for (const auto& w : plan.validation.warnings) std::cout << "warning: " << w << '\n';
    std::cout << "planner: " << plan.planner_id << '\n';
    return 0;
}

struct SearchArgs {
    std::string query;
    std::string method = "hyst";
    std::optional<std::size_t> k;
    std::optional<bool> refine;
    std::optional<double> lambda;
    std::string run_file;
    std::string query_id = "query";
    bool relax = false;
};

int cmd_search(const GlobalOptions& g, const SearchArgs& a) {
    auto method = hyst::parse_method(a.method);
    if (!method) {
        diag("unknown method '" + a.method + "' (expected bm25, dense, bm25+dense, rrf, linearized, hyst)");
        return 2;
    }
    if (a.lambda && *method != hyst::Method::Bm25Dense) {
        diag("--lambda applies only to bm25+dense");
        return 2;
    }
    auto config = hyst::ProjectConfig::load(g.config);
    auto engine = load_engine(config);
    hyst::MethodConfig mc;
    mc.method = *method;
    mc.k = a.k.value_or(config.defaults.k);
    mc.refine = a.refine.value_or(config.defaults.refine);
    mc.relax = a.relax;
    if (*method == hyst::Method::Bm25Dense) mc.lambda = a.lambda.value_or(config.defaults.lambda);
    auto outcome = engine.run(a.query, mc);
    for (const auto& w : outcome.warnings) diag("warning: " + w);
    if (outcome.relaxed) diag("results relaxed to the universal filter");

    if (!a.run_file.empty()) {
        std::ostringstream run;
        hyst::write_run(run, a.query_id, outcome.results, hyst::method_id(*method));
        hyst::write_file(a.run_file, run.str());
    }
    if (json_output(g)) {
        ordered_json results = ordered_json::array();
        for (std::size_t i = 0; i < outcome.results.items.size(); ++i) {
            const auto& hit = outcome.results.items[i];
            ordered_json attrs = ordered_json::object();
            if (const auto* r = engine.find_record(hit.id)) attrs = hyst::record_to_json(*r)["attrs"];
            results.push_back({{"rank", i + 1}, {"id", hit.id}, {"score", hit.score}, {"attrs", std::move(attrs)}});
        }
        ordered_json out = {{"query", a.query}, {"method", hyst::method_id(*method)}, {"results", std::move(results)}};
        if (outcome.plan) out["plan"] = outcome.plan->to_json();
        out["starved"] = outcome.starved;
        out["relaxed"] = outcome.relaxed;
        std::cout << out.dump(2) << '\n';
        return 0;
    }
    for (std::size_t i = 0; i < outcome.results.items.size(); ++i) {
        const auto& hit = outcome.results.items[i];
        const auto* r = engine.find_record(hit.id);
        std::cout << (i + 1) << '\t' << hit.id << '\t' << hyst::format_number(hit.score) << '\t'
                  << (r ? attrs_summary(engine.schema(), *r) : std::string()) << '\n';
    }
    return 0;
}

struct EvalArgs {
    std::string queries;
    std::string qrels;
    std::string methods = "all";
    bool ablate_refine = false;
    std::optional<std::size_t> k;
    std::string run_file;
};

int cmd_eval(const GlobalOptions& g, const EvalArgs& a) {
    auto config = hyst::ProjectConfig::load(g.config);
    const auto queries_path = a.queries.empty() ? config.queries : a.queries;
    const auto qrels_path = a.qrels.empty() ? config.qrels : a.qrels;
    if (queries_path.empty() || qrels_path.empty()) {
        diag("eval needs --queries and --qrels (or queries/qrels in the config)");
        return 2;
    }
    auto queries = hyst::load_queries(queries_path);
    auto qrels = hyst::Qrels::load(qrels_path);
    if (auto problems = hyst::query_qrels_mismatches(queries, qrels); !problems.empty()) {
        for (const auto& p : problems) diag(p);
        diag("query/qrels mismatch: " + std::to_string(problems.size()) + " problem(s)");
        return 1;
    }
    auto engine = load_engine(config);
    const auto k = a.k.value_or(20);

    hyst::EvalRun run;
    if (a.ablate_refine) {
        run = hyst::ablate_refine(engine, queries, qrels, k, g.jobs);
    } else {
        std::vector<hyst::MethodConfig> configs;
        std::vector<std::string> names;
        if (a.methods == "all") {
            for (auto m : hyst::kAllMethods) names.emplace_back(hyst::method_id(m));
        } else {
            std::stringstream ss(a.methods);
            for (std::string item; std::getline(ss, item, ',');) {
                if (!hyst::trim(item).empty()) names.push_back(hyst::trim(item));
            }
        }
        for (const auto& name : names) {
            auto m = hyst::parse_method(name);
            if (!m) {
                diag("unknown method '" + name + "'");
                return 2;
            }
            hyst::MethodConfig mc;
            mc.method = *m;
            mc.k = k;
            mc.refine = config.defaults.refine;
            if (*m == hyst::Method::Bm25Dense) mc.lambda = config.defaults.lambda;
            configs.push_back(mc);
        }
        run = hyst::compare(engine, configs, queries, qrels, g.jobs);
    }
    if (!a.run_file.empty()) hyst::write_file(a.run_file, run.run_file);
    if (json_output(g)) {
        std::cout << run.report.to_json().dump(2) << '\n';
    } else {
        std::cout << run.report.to_table();
    }
    return 0;
}

int cmd_synth(const std::string& dir, std::uint64_t seed, std::size_t queries, bool case_study) {
    hyst::SyntheticBenchmark bench;
    if (case_study) {
        bench = hyst::make_case_study(seed);
    } else {
        hyst::SyntheticOptions options;
        options.seed = seed;
        options.queries = queries;
        bench = hyst::make_synthetic_benchmark(options);
    }
    hyst::write_benchmark(bench, dir);
    std::cout << bench.records.size() << " records, " << bench.queries.size() << " queries written to " << dir << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid retrieval over semi-structured tabular records"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--config", g.config, "Project config file")->capture_default_str();
    app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"table", "json"}))->capture_default_str();
    app.add_option("--jobs", g.jobs, "Parallel queries during eval")->check(CLI::PositiveNumber)->capture_default_str();

    auto* ingest = app.add_subcommand("ingest", "Build record store, BM25 index and vector stores");

    auto* plan = app.add_subcommand("plan", "Show the filter and refined query for a question");
    std::string plan_query;
    bool plan_refine = false;
    plan->add_option("query", plan_query, "Natural-language question")->required();
    auto* plan_refine_opt = plan->add_flag("--refine,!--no-refine", plan_refine, "Refine the semantic query");

    auto* search = app.add_subcommand("search", "Run one retrieval method");
    SearchArgs sa;
    std::size_t k_value = 0;
    bool search_refine = false;
    double lambda_value = 0.5;
    search->add_option("query", sa.query, "Natural-language question")->required();
    search->add_option("--method", sa.method, "bm25, dense, bm25+dense, rrf, linearized or hyst")->capture_default_str();
    auto* k_opt = search->add_option("--k", k_value, "Number of results")->check(CLI::PositiveNumber);
    auto* refine_opt = search->add_flag("--refine,!--no-refine", search_refine, "Refine the semantic query (hyst)");
    auto* lambda_opt = search->add_option("--lambda", lambda_value, "Sparse weight for bm25+dense")->check(CLI::Range(0.0, 1.0));
    search->add_option("--run-file", sa.run_file, "Write trec-run TSV");
    search->add_option("--query-id", sa.query_id, "Query id used in the run file")->capture_default_str();
    search->add_flag("--relax", sa.relax, "Retry with the universal filter when the filter matches nothing");

    auto* eval = app.add_subcommand("eval", "Compare retrieval methods against qrels");
    EvalArgs ea;
    std::size_t eval_k = 20;
    eval->add_option("--queries", ea.queries, "TSV of query_id<TAB>text");
    eval->add_option("--qrels", ea.qrels, "TSV of query_id<TAB>doc_id");
    eval->add_option("--methods", ea.methods, "Comma-separated method ids or 'all'")->capture_default_str();
    eval->add_flag("--ablate-refine", ea.ablate_refine, "Evaluate HyST with and without query refinement");
    auto* eval_k_opt = eval->add_option("--k", eval_k, "Retrieval depth (at least 20)")->check(CLI::PositiveNumber);
    eval->add_option("--run-file", ea.run_file, "Write trec-run TSV of every method");

    auto* synth = app.add_subcommand("synth", "Write a synthetic benchmark (schema, corpus, queries, qrels, config)");
    std::string synth_dir;
    std::uint64_t synth_seed = 7;
    std::size_t synth_queries = 30;
    bool case_study = false;
    synth->add_option("dir", synth_dir, "Output directory")->required();
    synth->add_option("--seed", synth_seed, "Generator seed")->capture_default_str();
    synth->add_option("--queries", synth_queries, "Number of queries")->check(CLI::PositiveNumber)->capture_default_str();
    synth->add_flag("--case-study", case_study, "Write the 10-query constraint case study instead");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*ingest) return cmd_ingest(g);
        if (*plan) {
            std::optional<bool> refine;
            if (plan_refine_opt->count()) refine = plan_refine;
            return cmd_plan(g, plan_query, refine);
        }
        if (*search) {
            if (k_opt->count()) sa.k = k_value;
            if (refine_opt->count()) sa.refine = search_refine;
            if (lambda_opt->count()) sa.lambda = lambda_value;
            return cmd_search(g, sa);
        }
        if (*eval) {
            if (eval_k_opt->count()) ea.k = eval_k;
            return cmd_eval(g, ea);
        }
        if (*synth) return cmd_synth(synth_dir, synth_seed, synth_queries, case_study);
    } catch (const std::exception& e) {
        diag(std::string("error: ") + e.what());
        return 1;
    }
    return 0;
}
