#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hyst/config.hpp"
#include "hyst/error.hpp"
#include "hyst/eval.hpp"
#include "hyst/fusion.hpp"
#include "hyst/lexical.hpp"
#include "hyst/pipeline.hpp"
#include "hyst/synthetic.hpp"

#include <filesystem>

namespace py = pybind11;
using nlohmann::json;

namespace {

// JSON crosses the boundary as text so Python sees plain dicts and lists.
py::object to_py(const std::string& text) { return py::module_::import("json").attr("loads")(text); }
template <class J>
py::object to_py(const J& j) {
    return to_py(j.dump());
}
json from_py(const py::handle& obj) { return json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>()); }

hyst::AttrMap attrs_from_py(const py::handle& obj) {
    return hyst::record_from_json({{"id", ""}, {"text", ""}, {"attrs", from_py(obj)}}).attrs;
}

py::list scored(const std::vector<hyst::ScoredDoc>& docs) {
    py::list out;
    for (const auto& d : docs) out.append(py::make_tuple(d.id, d.score));
    return out;
}

hyst::RankedList ranked(const std::vector<std::pair<std::string, double>>& items) {
    hyst::RankedList out;
    for (const auto& [id, score] : items) out.items.push_back({id, score});
    hyst::sort_and_truncate(out.items, out.items.size());
    return out;
}

hyst::Method method_from(const std::string& id) {
    auto m = hyst::parse_method(id);
    if (!m) throw std::invalid_argument("unknown method '" + id + "'");
    return *m;
}

// A configured project: records ingested from the corpus and every index built in memory.
class Project {
public:
    explicit Project(const std::string& config_path) : config_(hyst::ProjectConfig::load(config_path)) {
        auto schema = hyst::load_schema(config_.schema);
        auto ingested = hyst::ingest(config_.corpus, schema, config_.text_fields);
        skipped_ = ingested.skipped.size();
        engine_ = std::make_unique<hyst::Engine>(
            hyst::Engine::build(schema, std::move(ingested.records), hyst::make_embedder(config_),
                                hyst::make_planner(config_, schema), config_.engine_options()));
    }

    std::size_t size() const { return engine_->records().size(); }
    std::size_t skipped() const { return skipped_; }

    py::list search(const std::string& query, const std::string& method, std::optional<std::size_t> k,
                    std::optional<bool> refine, std::optional<double> lambda) const {
        hyst::MethodConfig mc;
        mc.method = method_from(method);
        mc.k = k.value_or(config_.defaults.k);
        mc.refine = refine.value_or(config_.defaults.refine);
        if (mc.method == hyst::Method::Bm25Dense) mc.lambda = lambda.value_or(config_.defaults.lambda);
        if (lambda && mc.method != hyst::Method::Bm25Dense) throw std::invalid_argument("lambda applies only to bm25+dense");
        return scored(engine_->run(query, mc).results.items);
    }

    py::object plan(const std::string& query, bool refine) const { return to_py(engine_->planner().plan(query, refine).to_json()); }

    py::object evaluate(const std::string& queries, const std::string& qrels, const std::vector<std::string>& methods,
                        std::size_t k, bool ablate_refine) const {
        auto qs = hyst::load_queries(queries.empty() ? config_.queries : queries);
        auto qr = hyst::Qrels::load(qrels.empty() ? config_.qrels : qrels);
        if (ablate_refine) return to_py(hyst::ablate_refine(*engine_, qs, qr, k).report.to_json());
        std::vector<hyst::MethodConfig> configs;
        for (const auto& id : methods) {
            hyst::MethodConfig mc;
            mc.method = method_from(id);
            mc.k = k;
            if (mc.method == hyst::Method::Bm25Dense) mc.lambda = config_.defaults.lambda;
            configs.push_back(mc);
        }
        return to_py(hyst::compare(*engine_, configs, qs, qr).report.to_json());
    }

private:
    hyst::ProjectConfig config_;
    std::unique_ptr<hyst::Engine> engine_;
    std::size_t skipped_ = 0;
};

}  // namespace

PYBIND11_MODULE(_hyst, m) {
    m.doc() = "Hybrid structured/semantic retrieval over tabular records";

    auto error = py::register_exception<hyst::Error>(m, "HystError");
    py::register_exception<hyst::ParseError>(m, "ParseError", error.ptr());
    py::register_exception<hyst::SchemaError>(m, "SchemaError", error.ptr());
    py::register_exception<hyst::DimensionMismatch>(m, "DimensionMismatch", error.ptr());

    py::class_<hyst::Schema>(m, "Schema")
        .def_static("parse", &hyst::Schema::parse, py::arg("text"))
        .def_static("load", &hyst::load_schema, py::arg("path"))
        .def("columns", [](const hyst::Schema& s) {
            py::list out;
            for (const auto& c : s.columns()) out.append(c.name);
            return out;
        })
        .def("to_json", [](const hyst::Schema& s) { return to_py(s.to_json()); })
        .def("__len__", &hyst::Schema::size);

    py::class_<hyst::FilterExpr>(m, "Filter")
        .def(py::init<>())
        .def_static("parse", [](const std::string& raw) { return hyst::parse_filter(raw); }, py::arg("raw"))
        .def("is_universal", &hyst::FilterExpr::is_universal)
        .def("dump", &hyst::FilterExpr::dump)
        .def("__len__", &hyst::FilterExpr::size)
        .def("__eq__", [](const hyst::FilterExpr& a, const hyst::FilterExpr& b) { return a == b; })
        .def("__repr__", [](const hyst::FilterExpr& f) { return "Filter(" + f.dump() + ")"; });

    m.def("validate", [](const hyst::FilterExpr& f, const hyst::Schema& s) { return to_py(hyst::validate(f, s).to_json()); },
          py::arg("filter"), py::arg("schema"), "Validation report as a dict; 'accepted' is the cleaned filter.");
    m.def("validated", [](const hyst::FilterExpr& f, const hyst::Schema& s) { return hyst::validate(f, s).accepted; },
          py::arg("filter"), py::arg("schema"));
    m.def("matches", [](const hyst::FilterExpr& f, const py::dict& attrs) { return hyst::matches(f, attrs_from_py(attrs)); },
          py::arg("filter"), py::arg("attrs"));

    m.def("ingest", [](const std::string& path, const hyst::Schema& schema, const std::vector<std::string>& fields) {
        auto r = hyst::ingest(path, schema, fields);
        py::list records;
        for (const auto& rec : r.records) records.append(to_py(hyst::record_to_json(rec)));
        return py::make_tuple(records, r.skipped.size());
    }, py::arg("path"), py::arg("schema"), py::arg("text_fields") = hyst::kSyntheticTextFields);
    m.def("linearize", [](const py::dict& record, const hyst::Schema& schema) {
        return hyst::linearize(hyst::record_from_json(from_py(record)), schema);
    }, py::arg("record"), py::arg("schema"));

    py::class_<hyst::InvertedIndex>(m, "BM25Index")
        .def_static("build", [](const std::vector<std::pair<std::string, std::string>>& docs, double k1, double b) {
            std::vector<hyst::TextDoc> td;
            for (const auto& [id, text] : docs) td.push_back({id, text});
            return hyst::build_index(td, k1, b);
        }, py::arg("docs"), py::arg("k1") = 1.2, py::arg("b") = 0.75)
        .def("search", [](const hyst::InvertedIndex& ix, const std::string& q, std::size_t k) { return scored(ix.search(q, k)); },
             py::arg("query"), py::arg("k") = 10)
        .def("__len__", &hyst::InvertedIndex::doc_count)
        .def_property_readonly("avg_doc_length", &hyst::InvertedIndex::avg_doc_length)
        .def("doc_frequency", &hyst::InvertedIndex::doc_frequency);

    m.def("embed_hashed", [](const std::vector<std::string>& texts, std::size_t dim, std::uint64_t seed) {
        return hyst::embed_hashed(texts, dim, seed);
    }, py::arg("texts"), py::arg("dim") = 512, py::arg("seed") = 42);

    py::class_<hyst::VectorStore>(m, "VectorStore")
        .def(py::init<std::size_t>(), py::arg("dimension"))
        .def("add", [](hyst::VectorStore& s, std::string id, const py::dict& attrs, const std::vector<double>& v) {
            s.add(std::move(id), attrs_from_py(attrs), v);
        }, py::arg("id"), py::arg("attrs"), py::arg("vector"))
        .def("knn", [](const hyst::VectorStore& s, const std::vector<double>& q, std::size_t k,
                       const std::optional<hyst::FilterExpr>& f) { return scored(s.knn(q, k, f ? &*f : nullptr)); },
             py::arg("query"), py::arg("k") = 10, py::arg("filter") = py::none())
        .def("__len__", &hyst::VectorStore::size)
        .def_property_readonly("dimension", &hyst::VectorStore::dimension);

    using Items = std::vector<std::pair<std::string, double>>;
    m.def("interpolate", [](const Items& sparse, const Items& dense, double lambda, std::size_t k) {
        return scored(hyst::interpolate(ranked(sparse), ranked(dense), lambda, k).items);
    }, py::arg("sparse"), py::arg("dense"), py::arg("lam"), py::arg("k") = 10);
    m.def("rrf", [](const std::vector<Items>& lists, int c, std::size_t k) {
        std::vector<hyst::RankedList> rl;
        for (const auto& l : lists) rl.push_back(ranked(l));
        return scored(hyst::rrf(rl, c, k).items);
    }, py::arg("lists"), py::arg("c") = hyst::kDefaultRrfConstant, py::arg("k") = 10);

    m.def("plan_rules", [](const hyst::Schema& s, const std::string& q, bool refine) { return to_py(hyst::plan_rules(s, q, refine).to_json()); },
          py::arg("schema"), py::arg("query"), py::arg("refine") = false);
    m.def("render_prompt", [](const hyst::Schema& s, const std::string& q, std::size_t cap) { return hyst::render_prompt(s, q, cap); },
          py::arg("schema"), py::arg("question"), py::arg("cap") = hyst::kDefaultAllowableCap);

    m.def("precision_at_k", [](const std::vector<std::string>& r, const std::set<std::string>& rel, std::size_t k) {
        return hyst::precision_at_k(r, rel, k);
    }, py::arg("ranked"), py::arg("relevant"), py::arg("k"));
    m.def("recall_at_k", [](const std::vector<std::string>& r, const std::set<std::string>& rel, std::size_t k) {
        return hyst::recall_at_k(r, rel, k);
    }, py::arg("ranked"), py::arg("relevant"), py::arg("k"));
    m.def("reciprocal_rank", [](const std::vector<std::string>& r, const std::set<std::string>& rel) {
        return hyst::reciprocal_rank(r, rel);
    }, py::arg("ranked"), py::arg("relevant"));

    m.def("write_synthetic", [](const std::string& dir, std::uint64_t seed, std::size_t queries, bool case_study) {
        hyst::SyntheticOptions o;
        o.seed = seed;
        o.queries = queries;
        hyst::write_benchmark(case_study ? hyst::make_case_study(seed) : hyst::make_synthetic_benchmark(o), dir);
        return (std::filesystem::path(dir) / "config.json").string();
    }, py::arg("dir"), py::arg("seed") = 7, py::arg("queries") = 30, py::arg("case_study") = false,
          "Write a synthetic benchmark and return the path of its config file.");

    py::class_<Project>(m, "Project")
        .def(py::init<const std::string&>(), py::arg("config"))
        .def("__len__", &Project::size)
        .def_property_readonly("skipped", &Project::skipped)
        .def("search", &Project::search, py::arg("query"), py::arg("method") = "hyst", py::arg("k") = py::none(),
             py::arg("refine") = py::none(), py::arg("lam") = py::none())
        .def("plan", &Project::plan, py::arg("query"), py::arg("refine") = false)
        .def("evaluate", &Project::evaluate, py::arg("queries") = "", py::arg("qrels") = "",
             py::arg("methods") = std::vector<std::string>{"bm25", "dense", "bm25+dense", "rrf", "linearized", "hyst"},
             py::arg("k") = 20, py::arg("ablate_refine") = false);
}
