#include "hyst/eval.hpp"

#include "hyst/error.hpp"
#include "hyst/text.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iomanip>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace hyst {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::vector<std::string> split_tab(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto tab = line.find('\t', start);
        out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
        if (tab == std::string::npos) break;
        start = tab + 1;
    }
    return out;
}

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

std::size_t hits_in_top(std::span<const std::string> ranked, const std::set<std::string>& relevant, std::size_t k) {
    std::size_t hits = 0;
    const auto n = std::min(k, ranked.size());
    for (std::size_t i = 0; i < n; ++i) hits += relevant.count(ranked[i]);
    return hits;
}

}  // namespace

Qrels Qrels::parse(std::istream& in) {
    Qrels q;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (trim(line).empty()) continue;
        auto fields = split_tab(line);
        if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
            throw ParseError("qrels line " + std::to_string(line_no) + ": expected \"query_id<TAB>doc_id\"");
        }
        q.judgments[fields[0]].insert(fields[1]);
    }
    for (const auto& [qid, docs] : q.judgments) {
        if (docs.size() > kMaxRelevantPerQuery) {
            throw ParseError("qrels query " + qid + " has " + std::to_string(docs.size()) + " relevant docs (max " +
                             std::to_string(kMaxRelevantPerQuery) + ")");
        }
    }
    return q;
}

Qrels Qrels::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open qrels: " + path);
    return parse(in);
}

std::vector<Query> parse_queries(std::istream& in) {
    std::vector<Query> out;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (trim(line).empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0) {
            throw ParseError("queries line " + std::to_string(line_no) + ": expected \"query_id<TAB>text\"");
        }
        Query q{line.substr(0, tab), line.substr(tab + 1)};
        if (!seen.insert(q.id).second) throw ParseError("duplicate query id " + q.id);
        out.push_back(std::move(q));
    }
    return out;
}

std::vector<Query> load_queries(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open queries: " + path);
    return parse_queries(in);
}

double precision_at_k(std::span<const std::string> ranked, const std::set<std::string>& relevant, std::size_t k) {
    if (k == 0) throw std::invalid_argument("k must be >= 1");
    return static_cast<double>(hits_in_top(ranked, relevant, k)) / static_cast<double>(k);
}

double recall_at_k(std::span<const std::string> ranked, const std::set<std::string>& relevant, std::size_t k) {
    if (k == 0) throw std::invalid_argument("k must be >= 1");
    if (relevant.empty()) throw std::invalid_argument("recall needs a non-empty relevant set");
    return static_cast<double>(hits_in_top(ranked, relevant, k)) / static_cast<double>(relevant.size());
}

double reciprocal_rank(std::span<const std::string> ranked, const std::set<std::string>& relevant) {
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        if (relevant.count(ranked[i])) return 1.0 / static_cast<double>(i + 1);
    }
    return 0.0;
}

double mrr(const std::map<std::string, std::vector<std::string>>& runs, const Qrels& qrels) {
    if (qrels.judgments.empty()) return 0.0;
    double sum = 0;
    for (const auto& [qid, relevant] : qrels.judgments) {
        auto it = runs.find(qid);
        if (it != runs.end()) sum += reciprocal_rank(it->second, relevant);
    }
    return sum / static_cast<double>(qrels.judgments.size());
}

namespace {

double metric_at(const Metrics& m, std::size_t i) {
    switch (i) {
        case 0: return m.p1;
        case 1: return m.p5;
        case 2: return m.p10;
        case 3: return m.r20;
        default: return m.mrr;
    }
}

int method_order(const std::string& method) {
    if (auto m = parse_method(method)) {
        for (std::size_t i = 0; i < std::size(kAllMethods); ++i) {
            if (kAllMethods[i] == *m) return static_cast<int>(i);
        }
    }
    return static_cast<int>(std::size(kAllMethods));
}

std::string run_tag(const MethodSpec& spec) {
    auto tag = spec.method;
    if (!spec.label.empty() && spec.label != method_display(parse_method(spec.method).value_or(Method::Hyst))) {
        std::string label = spec.label;
        std::replace(label.begin(), label.end(), ' ', '_');
        tag += ":" + label;
    }
    return tag;
}

}  // namespace

std::vector<std::string> query_qrels_mismatches(std::span<const Query> queries, const Qrels& qrels) {
    std::vector<std::string> problems;
    std::set<std::string> ids;
    for (const auto& q : queries) {
        ids.insert(q.id);
        if (!qrels.judgments.count(q.id)) problems.push_back("query " + q.id + " has no relevance judgments");
    }
    for (const auto& [qid, _] : qrels.judgments) {
        if (!ids.count(qid)) problems.push_back("qrels query " + qid + " is not in the query set");
    }
    return problems;
}

EvalRun compare_runs(std::span<const MethodSpec> methods, std::span<const Query> queries, const Qrels& qrels,
                     std::size_t min_depth, std::size_t jobs) {
    if (auto problems = query_qrels_mismatches(queries, qrels); !problems.empty()) {
        std::string msg = "query/qrels mismatch:";
        for (const auto& p : problems) msg += "\n  " + p;
        throw Error(msg);
    }
    const auto depth = std::max<std::size_t>(20, min_depth);

    std::vector<std::size_t> order(methods.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return method_order(methods[a].method) < method_order(methods[b].method);
    });

    EvalRun run;
    run.report.query_count = queries.size();
    run.report.depth = depth;
    std::ostringstream run_file;

    for (auto mi : order) {
        const auto& spec = methods[mi];
        std::vector<RankedList> results(queries.size());
        std::vector<std::exception_ptr> errors(queries.size());
        auto work = [&](std::size_t qi) {
            try {
                results[qi] = spec.runner(queries[qi], depth);
            } catch (...) {
                errors[qi] = std::current_exception();
            }
        };
        if (jobs <= 1 || queries.size() <= 1) {
            for (std::size_t qi = 0; qi < queries.size(); ++qi) work(qi);
        } else {
            std::atomic<std::size_t> next{0};
            std::vector<std::thread> pool;
            for (std::size_t t = 0; t < std::min(jobs, queries.size()); ++t) {
                pool.emplace_back([&] {
                    for (auto qi = next++; qi < queries.size(); qi = next++) work(qi);
                });
            }
            for (auto& th : pool) th.join();
        }

        MetricRow row;
        row.label = spec.label;
        row.method = spec.method;
        const auto tag = run_tag(spec);
        for (std::size_t qi = 0; qi < queries.size(); ++qi) {
            if (errors[qi]) {
                try {
                    std::rethrow_exception(errors[qi]);
                } catch (const std::exception& e) {
                    throw Error("method " + spec.label + " failed on query " + queries[qi].id + ": " + e.what());
                }
            }
            const auto ids = results[qi].ids();
            const auto& relevant = qrels.judgments.at(queries[qi].id);
            QueryMetrics qm{queries[qi].id,
                            {precision_at_k(ids, relevant, 1), precision_at_k(ids, relevant, 5),
                             precision_at_k(ids, relevant, 10), recall_at_k(ids, relevant, 20),
                             reciprocal_rank(ids, relevant)}};
            row.per_query.push_back(qm);
            write_run(run_file, queries[qi].id, results[qi], tag);
        }
        if (!queries.empty()) {
            const auto n = static_cast<double>(queries.size());
            Metrics sum;
            for (const auto& qm : row.per_query) {
                sum.p1 += qm.metrics.p1;
                sum.p5 += qm.metrics.p5;
                sum.p10 += qm.metrics.p10;
                sum.r20 += qm.metrics.r20;
                sum.mrr += qm.metrics.mrr;
            }
            row.metrics = {sum.p1 / n, sum.p5 / n, sum.p10 / n, sum.r20 / n, sum.mrr / n};
        }
        run.report.rows.push_back(std::move(row));
    }

    for (std::size_t c = 0; c < std::size(kMetricNames); ++c) {
        double best = -1;
        for (const auto& row : run.report.rows) best = std::max(best, metric_at(row.metrics, c));
        for (auto& row : run.report.rows) {
            if (metric_at(row.metrics, c) == best) row.best.push_back(kMetricNames[c]);
        }
    }
    run.run_file = run_file.str();
    return run;
}

std::vector<MethodSpec> engine_methods(const Engine& engine, std::span<const MethodConfig> configs) {
    std::vector<MethodSpec> specs;
    for (const auto& config : configs) {
        check_method_config(config);
        specs.push_back({config.display_label(), std::string(method_id(config.method)),
                         [&engine, config](const Query& q, std::size_t depth) {
                             auto c = config;
                             c.k = std::max(depth, config.k);
                             return engine.run(q.text, c).results;
                         }});
    }
    return specs;
}

EvalRun compare(const Engine& engine, std::span<const MethodConfig> configs, std::span<const Query> queries,
                const Qrels& qrels, std::size_t jobs) {
    std::size_t depth = 20;
    for (const auto& c : configs) depth = std::max(depth, c.k);
    auto specs = engine_methods(engine, configs);
    return compare_runs(specs, queries, qrels, depth, jobs);
}

EvalRun ablate_refine(const Engine& engine, std::span<const Query> queries, const Qrels& qrels, std::size_t k,
                      std::size_t jobs) {
    MethodConfig full{Method::Hyst, k, std::nullopt, true, false, "full"};
    MethodConfig plain{Method::Hyst, k, std::nullopt, false, false, "w/o query refinement"};
    std::vector<MethodConfig> configs{full, plain};
    return compare(engine, configs, queries, qrels, jobs);
}

ordered_json EvalReport::to_json() const {
    ordered_json rows_json = ordered_json::array();
    for (const auto& row : rows) {
        ordered_json metrics = {{"P@1", row.metrics.p1},
                                {"P@5", row.metrics.p5},
                                {"P@10", row.metrics.p10},
                                {"R@20", row.metrics.r20},
                                {"MRR", row.metrics.mrr}};
        ordered_json per_query = ordered_json::array();
        for (const auto& qm : row.per_query) {
            per_query.push_back({{"query_id", qm.query_id},
                                 {"P@1", qm.metrics.p1},
                                 {"P@5", qm.metrics.p5},
                                 {"P@10", qm.metrics.p10},
                                 {"R@20", qm.metrics.r20},
                                 {"RR", qm.metrics.mrr}});
        }
        rows_json.push_back({{"label", row.label},
                             {"method", row.method},
                             {"metrics", std::move(metrics)},
                             {"best", row.best},
                             {"per_query", std::move(per_query)}});
    }
    return {{"query_count", query_count}, {"depth", depth}, {"rows", std::move(rows_json)}};
}

EvalReport EvalReport::from_json(const json& j) {
    EvalReport r;
    r.query_count = j.at("query_count").get<std::size_t>();
    r.depth = j.at("depth").get<std::size_t>();
    for (const auto& rj : j.at("rows")) {
        MetricRow row;
        row.label = rj.at("label").get<std::string>();
        row.method = rj.at("method").get<std::string>();
        const auto& m = rj.at("metrics");
        row.metrics = {m.at("P@1").get<double>(), m.at("P@5").get<double>(), m.at("P@10").get<double>(),
                       m.at("R@20").get<double>(), m.at("MRR").get<double>()};
        row.best = rj.at("best").get<std::vector<std::string>>();
        for (const auto& q : rj.at("per_query")) {
            row.per_query.push_back({q.at("query_id").get<std::string>(),
                                     {q.at("P@1").get<double>(), q.at("P@5").get<double>(),
                                      q.at("P@10").get<double>(), q.at("R@20").get<double>(),
                                      q.at("RR").get<double>()}});
        }
        r.rows.push_back(std::move(row));
    }
    return r;
}

std::string EvalReport::to_table() const {
    std::size_t label_width = 6;
    for (const auto& row : rows) label_width = std::max(label_width, row.label.size());
    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(label_width)) << "Method";
    for (const auto* name : kMetricNames) out << "  " << std::right << std::setw(7) << name << ' ';
    out << '\n';
    for (const auto& row : rows) {
        out << std::left << std::setw(static_cast<int>(label_width)) << row.label;
        for (std::size_t c = 0; c < std::size(kMetricNames); ++c) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.4f", metric_at(row.metrics, c));
            const bool best = std::find(row.best.begin(), row.best.end(), kMetricNames[c]) != row.best.end();
            out << "  " << std::right << std::setw(7) << buf << (best ? '*' : ' ');
        }
        out << '\n';
    }
    out << "queries: " << query_count << ", depth: " << depth << ", * = best in column\n";
    return out.str();
}

}  // namespace hyst
