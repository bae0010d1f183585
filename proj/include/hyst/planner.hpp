#pragma once

#include "hyst/corpus.hpp"
#include "hyst/filter.hpp"

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace hyst {

// Template text with `{name}` placeholders. Unknown placeholders are left verbatim and
// substituted values are never re-scanned.
class PromptTemplate {
public:
    explicit PromptTemplate(std::string text) : text_(std::move(text)) {}
    static PromptTemplate from_file(const std::string& path);

    const std::string& text() const { return text_; }
    std::string render(const std::map<std::string, std::string>& values) const;

private:
    std::string text_;
};

const PromptTemplate& default_filter_template();
const PromptTemplate& default_refine_template();

inline constexpr std::size_t kDefaultAllowableCap = 500;
inline constexpr double kPlannerTemperature = 0.3;
inline constexpr double kPlannerTopP = 0.8;

// {allowable_brands} and {allowable_categories} take the BRAND and CATEGORY columns;
// {allowable:COLUMN} works for any column. Lists past `cap` end with ", ...".
std::string render_prompt(const Schema& schema, std::string_view question, std::size_t cap = kDefaultAllowableCap,
                          const PromptTemplate& tmpl = default_filter_template());

// First balanced {...} region of `text` that parses as a JSON object.
std::optional<std::string> extract_json_object(std::string_view text);

class LLMClient {
public:
    virtual ~LLMClient() = default;
    // Throws TransportError when the model cannot be reached.
    virtual std::string complete(const std::string& prompt, double temperature, double top_p) = 0;
    virtual std::string id() const = 0;
};

// Replays canned responses. The first unused entry whose prompt_substring occurs in the
// prompt answers; once all matching entries are used, the last matching one repeats.
class ScriptedLLMClient final : public LLMClient {
public:
    struct Entry {
        std::string prompt_substring;
        std::string response;
    };
    struct Call {
        std::string prompt;
        double temperature = 0;
        double top_p = 0;
    };

    explicit ScriptedLLMClient(std::vector<Entry> entries) : entries_(std::move(entries)), used_(entries_.size()) {}
    static std::shared_ptr<ScriptedLLMClient> from_jsonl(const std::string& path);

    std::string complete(const std::string& prompt, double temperature, double top_p) override;
    std::string id() const override { return "scripted"; }

    std::vector<Call> calls() const;

private:
    std::vector<Entry> entries_;
    std::vector<bool> used_;
    std::vector<Call> calls_;
    mutable std::mutex mu_;
};

struct RemoteLLMConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string model = "gpt-4o";
    std::string api_key_env = "OPENAI_API_KEY";
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{500};
    std::chrono::milliseconds max_backoff{4000};
    std::chrono::seconds timeout{120};
};

// OpenAI-style `POST {base_url}/chat/completions`.
class RemoteLLMClient final : public LLMClient {
public:
    explicit RemoteLLMClient(RemoteLLMConfig config) : config_(std::move(config)) {}
    std::string complete(const std::string& prompt, double temperature, double top_p) override;
    std::string id() const override { return "remote:" + config_.model; }

private:
    RemoteLLMConfig config_;
};

struct QueryPlan {
    std::string raw_query;
    FilterExpr filter;
    std::string refined_query;
    ValidationReport validation;
    std::string planner_id;

    nlohmann::ordered_json to_json() const;
};

class Planner {
public:
    virtual ~Planner() = default;
    virtual QueryPlan plan(std::string_view query, bool refine) const = 0;
    virtual std::string id() const = 0;
};

struct LlmPlannerOptions {
    PromptTemplate filter_template = default_filter_template();
    PromptTemplate refine_template = default_refine_template();
    std::size_t allowable_cap = kDefaultAllowableCap;
};

QueryPlan plan_llm(LLMClient& client, const Schema& schema, std::string_view query, bool refine,
                   const LlmPlannerOptions& options = {});

// Offline planner: exact allowable-value mentions plus under/over/between numeric phrases.
QueryPlan plan_rules(const Schema& schema, std::string_view query, bool refine);

class LlmPlanner final : public Planner {
public:
    LlmPlanner(std::shared_ptr<LLMClient> client, Schema schema, LlmPlannerOptions options = {})
        : client_(std::move(client)), schema_(std::move(schema)), options_(std::move(options)) {}
    QueryPlan plan(std::string_view query, bool refine) const override {
        return plan_llm(*client_, schema_, query, refine, options_);
    }
    std::string id() const override { return "llm:" + client_->id(); }

private:
    std::shared_ptr<LLMClient> client_;
    Schema schema_;
    LlmPlannerOptions options_;
};

class RulePlanner final : public Planner {
public:
    explicit RulePlanner(Schema schema) : schema_(std::move(schema)) {}
    QueryPlan plan(std::string_view query, bool refine) const override { return plan_rules(schema_, query, refine); }
    std::string id() const override { return "rules"; }

private:
    Schema schema_;
};

}  // namespace hyst
