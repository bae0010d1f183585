#pragma once

#include "hyst/dense.hpp"
#include "hyst/lexical.hpp"
#include "hyst/pipeline.hpp"
#include "hyst/planner.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

namespace hyst {

struct EmbedderConfig {
    std::string type = "hashed";  // "hashed" | "remote"
    std::size_t dim = 512;
    std::uint64_t seed = 42;
    RemoteEmbedderConfig remote;
};

struct LlmConfig {
    std::string type = "scripted";  // "scripted" | "remote"
    std::string fixture;            // scripted: JSONL of {prompt_substring, response}
    RemoteLLMConfig remote;
};

struct PlannerConfig {
    std::string type = "rules";  // "rules" | "llm"
    LlmConfig llm;
    std::string filter_template;  // empty: built-in template
    std::string refine_template;
    std::size_t allowable_cap = kDefaultAllowableCap;
};

struct SearchDefaults {
    std::size_t k = 10;
    double lambda = 0.5;
    bool refine = false;
    int rrf_c = kDefaultRrfConstant;
    std::size_t fusion_depth = 100;
};

// One JSON document; relative paths resolve against the file's directory. Credentials are
// only ever named by environment variable, so secret-looking keys are rejected.
struct ProjectConfig {
    std::string corpus;
    std::string schema;
    std::string index_dir;
    std::string cache_dir;
    std::string queries;  // optional TSV defaults for eval
    std::string qrels;
    std::vector<std::string> text_fields = {"title", "description", "reviews"};
    EmbedderConfig embedder;
    PlannerConfig planner;
    SearchDefaults defaults;
    Bm25Params bm25;

    static ProjectConfig from_json(const nlohmann::json& j, const std::string& base_dir = ".");
    static ProjectConfig load(const std::string& path);

    EngineOptions engine_options() const;
};

std::shared_ptr<const EmbeddingProvider> make_embedder(const ProjectConfig& config);
std::shared_ptr<const Planner> make_planner(const ProjectConfig& config, const Schema& schema);

}  // namespace hyst
