#include "hyst/config.hpp"

#include "hyst/error.hpp"
#include "hyst/text.hpp"

#include <filesystem>

namespace hyst {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void reject_secrets(const json& j, const std::string& where) {
    if (!j.is_object()) return;
    for (const auto& [key, value] : j.items()) {
        auto k = to_lower(key);
        if (k == "api_key" || k == "apikey" || k == "token" || k == "password" || k == "secret") {
            throw ConfigError("config key " + where + key +
                              " looks like a credential; set api_key_env to an environment variable name instead");
        }
        reject_secrets(value, where + key + ".");
    }
}

std::string resolve(const std::string& base, const std::string& path) {
    if (path.empty() || fs::path(path).is_absolute()) return path;
    return (fs::path(base) / path).lexically_normal().string();
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (!j.contains(key) || j[key].is_null()) return;
    try {
        out = j[key].get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field ") + key + ": " + e.what());
    }
}

void read_retry(const json& j, int& attempts, std::chrono::milliseconds& initial, std::chrono::milliseconds& max) {
    read(j, "max_attempts", attempts);
    long long ms = initial.count();
    read(j, "initial_backoff_ms", ms);
    initial = std::chrono::milliseconds(ms);
    ms = max.count();
    read(j, "max_backoff_ms", ms);
    max = std::chrono::milliseconds(ms);
}

}  // namespace

ProjectConfig ProjectConfig::from_json(const json& j, const std::string& base_dir) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    reject_secrets(j, "");
    ProjectConfig c;
    read(j, "corpus", c.corpus);
    read(j, "schema", c.schema);
    read(j, "index_dir", c.index_dir);
    read(j, "cache_dir", c.cache_dir);
    read(j, "queries", c.queries);
    read(j, "qrels", c.qrels);
    read(j, "text_fields", c.text_fields);
    c.queries = resolve(base_dir, c.queries);
    c.qrels = resolve(base_dir, c.qrels);
    c.corpus = resolve(base_dir, c.corpus);
    c.schema = resolve(base_dir, c.schema);
    c.index_dir = resolve(base_dir, c.index_dir.empty() ? "index" : c.index_dir);
    c.cache_dir = resolve(base_dir, c.cache_dir.empty() ? "cache" : c.cache_dir);

    if (j.contains("embedder")) {
        const auto& e = j["embedder"];
        read(e, "type", c.embedder.type);
        read(e, "dim", c.embedder.dim);
        read(e, "seed", c.embedder.seed);
        auto& r = c.embedder.remote;
        read(e, "base_url", r.base_url);
        read(e, "model", r.model);
        read(e, "api_key_env", r.api_key_env);
        read(e, "dimension", r.dimension);
        read(e, "batch_size", r.batch_size);
        read_retry(e, r.max_attempts, r.initial_backoff, r.max_backoff);
        if (c.embedder.type != "hashed" && c.embedder.type != "remote") {
            throw ConfigError("embedder.type must be \"hashed\" or \"remote\"");
        }
    }
    if (j.contains("planner")) {
        const auto& p = j["planner"];
        read(p, "type", c.planner.type);
        read(p, "filter_template", c.planner.filter_template);
        read(p, "refine_template", c.planner.refine_template);
        read(p, "allowable_cap", c.planner.allowable_cap);
        c.planner.filter_template = resolve(base_dir, c.planner.filter_template);
        c.planner.refine_template = resolve(base_dir, c.planner.refine_template);
        if (p.contains("llm")) {
            const auto& l = p["llm"];
            read(l, "type", c.planner.llm.type);
            read(l, "fixture", c.planner.llm.fixture);
            c.planner.llm.fixture = resolve(base_dir, c.planner.llm.fixture);
            auto& r = c.planner.llm.remote;
            read(l, "base_url", r.base_url);
            read(l, "model", r.model);
            read(l, "api_key_env", r.api_key_env);
            read_retry(l, r.max_attempts, r.initial_backoff, r.max_backoff);
            if (c.planner.llm.type != "scripted" && c.planner.llm.type != "remote") {
                throw ConfigError("planner.llm.type must be \"scripted\" or \"remote\"");
            }
        }
        if (c.planner.type != "rules" && c.planner.type != "llm") {
            throw ConfigError("planner.type must be \"rules\" or \"llm\"");
        }
    }
    if (j.contains("defaults")) {
        const auto& d = j["defaults"];
        read(d, "k", c.defaults.k);
        read(d, "lambda", c.defaults.lambda);
        read(d, "refine", c.defaults.refine);
        read(d, "rrf_c", c.defaults.rrf_c);
        read(d, "fusion_depth", c.defaults.fusion_depth);
    }
    if (j.contains("bm25")) {
        read(j["bm25"], "k1", c.bm25.k1);
        read(j["bm25"], "b", c.bm25.b);
    }
    if (c.defaults.k < 1) throw ConfigError("defaults.k must be >= 1");
    if (c.defaults.rrf_c < 1) throw ConfigError("defaults.rrf_c must be >= 1");
    if (!(c.defaults.lambda >= 0.0 && c.defaults.lambda <= 1.0)) throw ConfigError("defaults.lambda must be in [0, 1]");
    return c;
}

ProjectConfig ProjectConfig::load(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }
    auto base = fs::path(path).parent_path().string();
    return from_json(j, base.empty() ? "." : base);
}

EngineOptions ProjectConfig::engine_options() const {
    EngineOptions o;
    o.bm25 = bm25;
    o.rrf_c = defaults.rrf_c;
    o.fusion_depth = defaults.fusion_depth;
    return o;
}

std::shared_ptr<const EmbeddingProvider> make_embedder(const ProjectConfig& config) {
    if (config.embedder.type == "hashed") {
        return std::make_shared<HashedEmbedder>(config.embedder.dim, config.embedder.seed);
    }
    auto remote = std::make_shared<RemoteEmbedder>(config.embedder.remote);
    if (config.cache_dir.empty()) return remote;
    fs::create_directories(config.cache_dir);
    return std::make_shared<CachedEmbedder>(remote, (fs::path(config.cache_dir) / "embeddings.jsonl").string());
}

std::shared_ptr<const Planner> make_planner(const ProjectConfig& config, const Schema& schema) {
    if (config.planner.type == "rules") return std::make_shared<RulePlanner>(schema);
    LlmPlannerOptions options;
    if (!config.planner.filter_template.empty()) {
        options.filter_template = PromptTemplate::from_file(config.planner.filter_template);
    }
    if (!config.planner.refine_template.empty()) {
        options.refine_template = PromptTemplate::from_file(config.planner.refine_template);
    }
    options.allowable_cap = config.planner.allowable_cap;
    std::shared_ptr<LLMClient> client;
    if (config.planner.llm.type == "scripted") {
        if (config.planner.llm.fixture.empty()) throw ConfigError("scripted LLM needs planner.llm.fixture");
        client = ScriptedLLMClient::from_jsonl(config.planner.llm.fixture);
    } else {
        client = std::make_shared<RemoteLLMClient>(config.planner.llm.remote);
    }
    return std::make_shared<LlmPlanner>(std::move(client), schema, std::move(options));
}

}  // namespace hyst
