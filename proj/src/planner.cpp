#include "hyst/planner.hpp"

#include "http_client.hpp"
#include "hyst/error.hpp"
#include "hyst/text.hpp"

#include <algorithm>
#include <fstream>
#include <regex>

namespace hyst {

using nlohmann::json;
using nlohmann::ordered_json;

PromptTemplate PromptTemplate::from_file(const std::string& path) { return PromptTemplate(read_file(path)); }

std::string PromptTemplate::render(const std::map<std::string, std::string>& values) const {
    std::string out;
    out.reserve(text_.size());
    std::size_t pos = 0;
    while (pos < text_.size()) {
        auto open = text_.find('{', pos);
        if (open == std::string::npos) break;
        auto close = text_.find('}', open + 1);
        if (close == std::string::npos) break;
        auto name = text_.substr(open + 1, close - open - 1);
        auto it = values.find(name);
        if (it == values.end()) {
            out.append(text_, pos, open + 1 - pos);
            pos = open + 1;
            continue;
        }
        out.append(text_, pos, open - pos);
        out += it->second;
        pos = close + 1;
    }
    out.append(text_, pos, std::string::npos);
    return out;
}

namespace {

std::string join_capped(const ColumnSpec* col, std::size_t cap) {
    if (!col || !col->allowable_values) return {};
    const auto& values = *col->allowable_values;
    std::string out;
    const auto n = std::min(cap, values.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (i) out += ", ";
        out += values[i];
    }
    if (values.size() > cap) out += n ? ", ..." : "...";
    return out;
}

}  // namespace

std::string render_prompt(const Schema& schema, std::string_view question, std::size_t cap,
                          const PromptTemplate& tmpl) {
    std::map<std::string, std::string> values;
    values["allowable_brands"] = join_capped(schema.find("BRAND"), cap);
    values["allowable_categories"] = join_capped(schema.find("CATEGORY"), cap);
    for (const auto& col : schema.columns()) values["allowable:" + col.name] = join_capped(&col, cap);
    values["question"] = std::string(question);
    return tmpl.render(values);
}

std::optional<std::string> extract_json_object(std::string_view text) {
    for (std::size_t start = text.find('{'); start != std::string_view::npos; start = text.find('{', start + 1)) {
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (std::size_t i = start; i < text.size(); ++i) {
            char c = text[i];
            if (in_string) {
                if (escaped) {
                    escaped = false;
                } else if (c == '\\') {
                    escaped = true;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}' && --depth == 0) {
                auto candidate = text.substr(start, i - start + 1);
                auto parsed = json::parse(candidate, nullptr, false);
                if (!parsed.is_discarded() && parsed.is_object()) return std::string(candidate);
                break;
            }
        }
    }
    return std::nullopt;
}

std::shared_ptr<ScriptedLLMClient> ScriptedLLMClient::from_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scripted LLM fixture: " + path);
    std::vector<Entry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("response") || !j["response"].is_string()) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected {prompt_substring, response}");
        }
        entries.push_back({j.value("prompt_substring", ""), j["response"].get<std::string>()});
    }
    return std::make_shared<ScriptedLLMClient>(std::move(entries));
}

std::string ScriptedLLMClient::complete(const std::string& prompt, double temperature, double top_p) {
    std::lock_guard lock(mu_);
    calls_.push_back({prompt, temperature, top_p});
    std::optional<std::size_t> last_match;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (prompt.find(entries_[i].prompt_substring) == std::string::npos) continue;
        if (!used_[i]) {
            used_[i] = true;
            return entries_[i].response;
        }
        last_match = i;
    }
    if (last_match) return entries_[*last_match].response;
    throw TransportError("scripted LLM has no response for prompt");
}

std::vector<ScriptedLLMClient::Call> ScriptedLLMClient::calls() const {
    std::lock_guard lock(mu_);
    return calls_;
}

std::string RemoteLLMClient::complete(const std::string& prompt, double temperature, double top_p) {
    json body = {{"model", config_.model},
                 {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
                 {"temperature", temperature},
                 {"top_p", top_p}};
    detail::RetryPolicy policy{config_.max_attempts, config_.initial_backoff, config_.max_backoff, config_.timeout};
    auto response = detail::post_json(config_.base_url, "/chat/completions", body, config_.api_key_env, policy);
    try {
        return response.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw TransportError(std::string("unexpected chat completion response: ") + e.what());
    }
}

ordered_json QueryPlan::to_json() const {
    return {{"raw_query", raw_query},
            {"filter", filter.to_json()},
            {"refined_query", refined_query},
            {"validation", validation.to_json()},
            {"planner", planner_id}};
}

namespace {

constexpr std::string_view kReaskSuffix =
    "\n\nYour previous answer could not be parsed as a JSON filter. "
    "Answer only the filtering conditions in JSON format.";

std::optional<FilterExpr> try_parse_filter(std::string_view response) {
    auto object = extract_json_object(response);
    if (!object) return std::nullopt;
    try {
        return parse_filter(*object);
    } catch (const ParseError&) {
        return std::nullopt;
    }
}

std::string clean_refinement(std::string_view response) {
    std::string text = trim(response);
    if (text.rfind("```", 0) == 0) {
        auto first_newline = text.find('\n');
        text = first_newline == std::string::npos ? std::string() : text.substr(first_newline + 1);
        if (auto fence = text.rfind("```"); fence != std::string::npos) text.erase(fence);
        text = trim(text);
    }
    while (text.size() >= 2 && ((text.front() == '"' && text.back() == '"') || (text.front() == '\'' && text.back() == '\''))) {
        text = trim(std::string_view(text).substr(1, text.size() - 2));
    }
    return collapse_whitespace(text);
}

}  // namespace

QueryPlan plan_llm(LLMClient& client, const Schema& schema, std::string_view query, bool refine,
                   const LlmPlannerOptions& options) {
    QueryPlan plan;
    plan.raw_query = std::string(query);
    plan.planner_id = "llm:" + client.id();

    const auto prompt = render_prompt(schema, query, options.allowable_cap, options.filter_template);
    auto parsed = try_parse_filter(client.complete(prompt, kPlannerTemperature, kPlannerTopP));
    std::vector<std::string> warnings;
    if (!parsed) {
        parsed = try_parse_filter(client.complete(prompt + std::string(kReaskSuffix), kPlannerTemperature, kPlannerTopP));
        if (!parsed) warnings.push_back("filter output unparseable after re-ask; using universal filter");
    }
    plan.validation = validate(parsed.value_or(FilterExpr::universal()), schema);
    plan.validation.warnings.insert(plan.validation.warnings.begin(), warnings.begin(), warnings.end());
    plan.filter = plan.validation.accepted;

    plan.refined_query = plan.raw_query;
    // With no accepted constraint there is nothing to strip from the query.
    if (refine && !plan.filter.is_universal()) {
        const auto refine_prompt =
            options.refine_template.render({{"question", plan.raw_query}, {"filter", plan.filter.dump()}});
        auto refined = clean_refinement(client.complete(refine_prompt, kPlannerTemperature, kPlannerTopP));
        if (has_alnum(refined)) {
            plan.refined_query = std::move(refined);
        } else {
            plan.validation.warnings.push_back("empty refinement; using raw query");
        }
    }
    return plan;
}

namespace {

struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;
};

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

bool bounded(std::string_view text, std::size_t begin, std::size_t end) {
    return (begin == 0 || !word_char(text[begin - 1]) || !word_char(text[begin])) &&
           (end == text.size() || !word_char(text[end]) || !word_char(text[end - 1]));
}

bool overlaps(const std::vector<Span>& spans, std::size_t begin, std::size_t end) {
    return std::any_of(spans.begin(), spans.end(), [&](const Span& s) { return begin < s.end && s.begin < end; });
}

struct ValueMention {
    Span span;
    const ColumnSpec* column = nullptr;
    std::string value;
};

struct NumericMention {
    Span span;
    const ColumnSpec* column = nullptr;
    Predicate predicate;
};

struct Extraction {
    std::vector<ValueMention> values;
    std::vector<NumericMention> numerics;
    std::vector<Span> removed;
};

std::vector<ValueMention> find_values(const Schema& schema, std::string_view text, std::vector<Span>& taken) {
    struct Candidate {
        const ColumnSpec* column;
        const std::string* value;
    };
    std::vector<Candidate> candidates;
    for (const auto& col : schema.columns()) {
        if (col.kind == ColumnKind::Numeric || !col.allowable_values) continue;
        for (const auto& v : *col.allowable_values) {
            if (has_alnum(v)) candidates.push_back({&col, &v});
        }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.value->size() > b.value->size(); });

    const auto lowered = to_lower(text);
    std::vector<ValueMention> found;
    for (const auto& c : candidates) {
        const auto needle = to_lower(*c.value);
        for (auto pos = lowered.find(needle); pos != std::string::npos; pos = lowered.find(needle, pos + 1)) {
            const auto end = pos + needle.size();
            if (!bounded(lowered, pos, end) || overlaps(taken, pos, end)) continue;
            taken.push_back({pos, end});
            found.push_back({{pos, end}, c.column, *c.value});
        }
    }
    std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.span.begin < b.span.begin; });
    return found;
}

const ColumnSpec* numeric_column(const Schema& schema, std::string_view text, std::size_t phrase_begin,
                                 bool currency) {
    const auto lowered = to_lower(text.substr(0, phrase_begin));
    const ColumnSpec* nearest = nullptr;
    std::size_t nearest_pos = 0;
    const ColumnSpec* first_numeric = nullptr;
    const ColumnSpec* price = nullptr;
    for (const auto& col : schema.columns()) {
        if (col.kind != ColumnKind::Numeric) continue;
        if (!first_numeric) first_numeric = &col;
        if (iequals(col.name, "PRICE")) price = &col;
        auto name = to_lower(col.name);
        std::replace(name.begin(), name.end(), '_', ' ');
        for (auto pos = lowered.rfind(name); pos != std::string::npos; pos = pos ? lowered.rfind(name, pos - 1) : std::string::npos) {
            if (!bounded(lowered, pos, pos + name.size())) continue;
            if (!nearest || pos > nearest_pos) {
                nearest = &col;
                nearest_pos = pos;
            }
            break;
        }
    }
    if (nearest) return nearest;
    if (currency && price) return price;
    return first_numeric;
}

std::vector<NumericMention> find_numerics(const Schema& schema, std::string_view text, std::vector<Span>& taken) {
    static const std::regex between(R"(\bbetween\s+\$?(\d+(?:\.\d+)?)\s+and\s+\$?(\d+(?:\.\d+)?))",
                                    std::regex::icase);
    static const std::regex below(R"(\b(?:under|below|less than)\s+\$?(\d+(?:\.\d+)?))", std::regex::icase);
    static const std::regex above(R"(\b(?:over|above|more than)\s+\$?(\d+(?:\.\d+)?))", std::regex::icase);

    std::vector<NumericMention> found;
    const std::string haystack(text);
    auto scan = [&](const std::regex& re, auto make) {
        for (auto it = std::sregex_iterator(haystack.begin(), haystack.end(), re); it != std::sregex_iterator(); ++it) {
            const auto& m = *it;
            const auto begin = static_cast<std::size_t>(m.position(0));
            const auto end = begin + static_cast<std::size_t>(m.length(0));
            if (overlaps(taken, begin, end)) continue;
            const bool currency = m.str(0).find('$') != std::string::npos;
            const auto* col = numeric_column(schema, text, begin, currency);
            if (!col) continue;
            taken.push_back({begin, end});
            found.push_back({{begin, end}, col, make(m)});
        }
    };
    scan(between, [](const std::smatch& m) -> Predicate {
        double lo = std::stod(m.str(1));
        double hi = std::stod(m.str(2));
        if (lo > hi) std::swap(lo, hi);
        return Between{lo, hi};
    });
    scan(below, [](const std::smatch& m) -> Predicate { return Lt{std::stod(m.str(1))}; });
    scan(above, [](const std::smatch& m) -> Predicate { return Gt{std::stod(m.str(1))}; });
    std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.span.begin < b.span.begin; });
    return found;
}

Extraction extract(const Schema& schema, std::string_view text) {
    Extraction ex;
    ex.values = find_values(schema, text, ex.removed);
    ex.numerics = find_numerics(schema, text, ex.removed);
    return ex;
}

std::string remove_spans(std::string_view text, std::vector<Span> spans) {
    std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) { return a.begin < b.begin; });
    std::string out;
    std::size_t pos = 0;
    for (const auto& s : spans) {
        out.append(text.substr(pos, s.begin - pos));
        out.push_back(' ');
        pos = s.end;
    }
    out.append(text.substr(pos));
    return trim(collapse_whitespace(out));
}

}  // namespace

QueryPlan plan_rules(const Schema& schema, std::string_view query, bool refine) {
    QueryPlan plan;
    plan.raw_query = std::string(query);
    plan.planner_id = "rules";

    auto ex = extract(schema, query);
    FilterExpr expr;
    for (const auto& col : schema.columns()) {
        std::vector<Scalar> mentioned;
        for (const auto& m : ex.values) {
            if (m.column != &col) continue;
            Scalar v{m.value};
            if (std::find(mentioned.begin(), mentioned.end(), v) == mentioned.end()) mentioned.push_back(std::move(v));
        }
        if (!mentioned.empty()) {
            if (col.kind == ColumnKind::Single && mentioned.size() == 1) {
                expr.add(col.name, Eq{mentioned.front()});
            } else {
                expr.add(col.name, In{std::move(mentioned)});
            }
            continue;
        }
        for (const auto& m : ex.numerics) {
            if (m.column == &col) {
                expr.add(col.name, m.predicate);
                break;
            }
        }
    }
    plan.validation = validate(expr, schema);
    plan.filter = plan.validation.accepted;

    plan.refined_query = plan.raw_query;
    if (refine) {
        // Removing one mention can join its neighbours into a new one; repeat to a fixed point.
        std::string refined = remove_spans(query, ex.removed);
        for (int round = 0; round < 16; ++round) {
            auto again = extract(schema, refined);
            if (again.removed.empty()) break;
            refined = remove_spans(refined, again.removed);
        }
        if (has_alnum(refined)) plan.refined_query = std::move(refined);
    }
    return plan;
}

}  // namespace hyst
