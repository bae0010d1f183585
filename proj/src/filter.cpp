#include "hyst/filter.hpp"

#include "hyst/error.hpp"
#include "hyst/text.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace hyst {

using nlohmann::ordered_json;

namespace {

ordered_json number_json(double v) {
    if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 9.007199254740992e15) {
        return ordered_json(static_cast<std::int64_t>(v));
    }
    return ordered_json(v);
}

ordered_json scalar_json(const Scalar& s) {
    if (const auto* str = std::get_if<std::string>(&s)) return ordered_json(*str);
    return number_json(std::get<double>(s));
}

std::string scalar_text(const Scalar& s) {
    if (const auto* str = std::get_if<std::string>(&s)) return *str;
    return format_number(std::get<double>(s));
}

Scalar parse_scalar(const ordered_json& j, const std::string& column) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number()) return j.get<double>();
    throw ParseError("column " + column + ": operand must be a string or number");
}

double parse_number(const ordered_json& j, const std::string& column, std::string_view op) {
    if (!j.is_number()) throw ParseError("column " + column + ": " + std::string(op) + " expects a number");
    return j.get<double>();
}

}  // namespace

const Predicate* FilterExpr::find(std::string_view column) const {
    for (const auto& c : clauses_) {
        if (c.column == column) return &c.predicate;
    }
    return nullptr;
}

void FilterExpr::add(std::string column, Predicate predicate) {
    if (find(column)) throw ParseError("column " + column + " has more than one predicate");
    clauses_.push_back({std::move(column), std::move(predicate)});
}

ordered_json FilterExpr::to_json() const {
    ordered_json out = ordered_json::object();
    for (const auto& c : clauses_) {
        ordered_json op = std::visit(
            [](const auto& p) -> ordered_json {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, Eq>) {
                    return {{"$eq", scalar_json(p.value)}};
                } else if constexpr (std::is_same_v<T, In>) {
                    ordered_json arr = ordered_json::array();
                    for (const auto& v : p.values) arr.push_back(scalar_json(v));
                    return {{"$in", std::move(arr)}};
                } else if constexpr (std::is_same_v<T, Lt>) {
                    return {{"$lt", number_json(p.value)}};
                } else if constexpr (std::is_same_v<T, Gt>) {
                    return {{"$gt", number_json(p.value)}};
                } else {
                    return {{"$between", ordered_json::array({number_json(p.lo), number_json(p.hi)})}};
                }
            },
            c.predicate);
        out[c.column] = std::move(op);
    }
    return out;
}

FilterExpr filter_from_json(const ordered_json& j) {
    if (!j.is_object()) throw ParseError("filter must be a JSON object");
    FilterExpr expr;
    for (const auto& [column, body] : j.items()) {
        if (!body.is_object()) throw ParseError("column " + column + ": expected an operator object");
        if (body.empty()) throw ParseError("column " + column + ": missing operator");
        if (body.size() > 1) throw ParseError("column " + column + ": more than one operator");
        const auto first = body.begin();
        const std::string op = first.key();
        const auto& operand = first.value();
        if (op == "$eq") {
            expr.add(column, Eq{parse_scalar(operand, column)});
        } else if (op == "$in") {
            if (!operand.is_array() || operand.empty()) {
                throw ParseError("column " + column + ": $in expects a non-empty array");
            }
            In in;
            for (const auto& v : operand) {
                auto s = parse_scalar(v, column);
                if (std::find(in.values.begin(), in.values.end(), s) == in.values.end()) in.values.push_back(std::move(s));
            }
            expr.add(column, std::move(in));
        } else if (op == "$lt") {
            expr.add(column, Lt{parse_number(operand, column, op)});
        } else if (op == "$gt") {
            expr.add(column, Gt{parse_number(operand, column, op)});
        } else if (op == "$between") {
            if (!operand.is_array() || operand.size() != 2) {
                throw ParseError("column " + column + ": $between expects [lo, hi]");
            }
            double lo = parse_number(operand[0], column, op);
            double hi = parse_number(operand[1], column, op);
            if (!(lo <= hi)) throw ParseError("column " + column + ": $between requires lo <= hi");
            expr.add(column, Between{lo, hi});
        } else {
            throw ParseError("column " + column + ": unknown operator " + op);
        }
    }
    return expr;
}

FilterExpr parse_filter(std::string_view raw) {
    // nlohmann keeps the last of duplicate keys; reject them instead.
    std::vector<std::set<std::string>> open_objects;
    std::string duplicate;
    ordered_json::parser_callback_t cb = [&](int, ordered_json::parse_event_t event, ordered_json& parsed) {
        using E = ordered_json::parse_event_t;
        if (event == E::object_start) {
            open_objects.emplace_back();
        } else if (event == E::object_end) {
            if (!open_objects.empty()) open_objects.pop_back();
        } else if (event == E::key && !open_objects.empty()) {
            auto key = parsed.get<std::string>();
            if (!open_objects.back().insert(key).second && duplicate.empty()) duplicate = key;
        }
        return true;
    };
    ordered_json j;
    try {
        j = ordered_json::parse(raw.begin(), raw.end(), cb);
    } catch (const ordered_json::parse_error& e) {
        throw ParseError(std::string("filter JSON: ") + e.what());
    }
    if (!duplicate.empty()) throw ParseError("duplicate key '" + duplicate + "' in filter");
    return filter_from_json(j);
}

ordered_json ValidationReport::to_json() const {
    ordered_json dropped = ordered_json::array();
    for (const auto& d : dropped_clauses) {
        ordered_json e = {{"column", d.column}, {"reason", d.reason}};
        if (!d.detail.empty()) e["detail"] = d.detail;
        dropped.push_back(std::move(e));
    }
    ordered_json corrections = ordered_json::array();
    for (const auto& c : value_corrections) {
        corrections.push_back({{"column", c.column}, {"raw", c.raw}, {"matched", c.matched}});
    }
    return {{"accepted", accepted.to_json()},
            {"dropped_clauses", std::move(dropped)},
            {"value_corrections", std::move(corrections)},
            {"warnings", warnings}};
}

namespace {

struct Validator {
    const ColumnSpec& col;
    ValidationReport& report;

    void drop(std::string reason, std::string detail = {}) {
        report.dropped_clauses.push_back({col.name, std::move(reason), std::move(detail)});
    }

    // Canonical allowable value for a categorical operand, or nullopt when it has none.
    std::optional<Scalar> canonical(const Scalar& s) {
        if (!col.allowable_values) return s;
        const auto* str = std::get_if<std::string>(&s);
        if (!str) return std::nullopt;
        for (const auto& allowed : *col.allowable_values) {
            if (iequals(allowed, *str)) {
                if (allowed != *str) report.value_corrections.push_back({col.name, *str, allowed});
                return Scalar{allowed};
            }
        }
        return std::nullopt;
    }

    std::optional<Predicate> numeric(const Predicate& p) {
        if (const auto* eq = std::get_if<Eq>(&p)) {
            if (!std::holds_alternative<double>(eq->value)) {
                drop("type mismatch", "non-numeric operand on numeric column");
                return std::nullopt;
            }
            return p;
        }
        if (const auto* in = std::get_if<In>(&p)) {
            for (const auto& v : in->values) {
                if (!std::holds_alternative<double>(v)) {
                    drop("type mismatch", "non-numeric operand on numeric column");
                    return std::nullopt;
                }
            }
        }
        return p;
    }

    std::optional<Predicate> categorical(const Predicate& p) {
        if (std::holds_alternative<Lt>(p) || std::holds_alternative<Gt>(p) || std::holds_alternative<Between>(p)) {
            drop("type mismatch", "range operator on " + std::string(to_string(col.kind)) + " column");
            return std::nullopt;
        }
        std::vector<Scalar> raw;
        bool was_eq = false;
        if (const auto* eq = std::get_if<Eq>(&p)) {
            raw.push_back(eq->value);
            was_eq = true;
        } else {
            raw = std::get<In>(p).values;
        }
        if (col.allowable_values) {
            for (const auto& v : raw) {
                if (!std::holds_alternative<std::string>(v)) {
                    drop("type mismatch", "numeric operand on categorical column");
                    return std::nullopt;
                }
            }
        }
        std::vector<Scalar> kept;
        for (const auto& v : raw) {
            auto c = canonical(v);
            if (!c) {
                drop("unknown value", scalar_text(v));
                continue;
            }
            if (std::find(kept.begin(), kept.end(), *c) == kept.end()) kept.push_back(std::move(*c));
        }
        if (kept.empty()) return std::nullopt;
        if (was_eq && col.kind != ColumnKind::Multiple) return Eq{std::move(kept.front())};
        return In{std::move(kept)};
    }
};

}  // namespace

ValidationReport validate(const FilterExpr& expr, const Schema& schema) {
    ValidationReport report;
    for (const auto& clause : expr.clauses()) {
        const auto* col = schema.find(clause.column);
        if (!col) {
            report.dropped_clauses.push_back({clause.column, "unknown column", {}});
            continue;
        }
        if (report.accepted.find(col->name)) {
            report.dropped_clauses.push_back({col->name, "duplicate column", clause.column});
            continue;
        }
        Validator v{*col, report};
        auto accepted = col->kind == ColumnKind::Numeric ? v.numeric(clause.predicate) : v.categorical(clause.predicate);
        if (accepted) report.accepted.add(col->name, std::move(*accepted));
    }
    return report;
}

namespace {

bool scalar_matches(const Scalar& operand, const AttrValue& attr) {
    if (const auto* list = std::get_if<std::vector<std::string>>(&attr)) {
        const auto* s = std::get_if<std::string>(&operand);
        return s && std::find(list->begin(), list->end(), *s) != list->end();
    }
    if (const auto* s = std::get_if<std::string>(&attr)) {
        const auto* o = std::get_if<std::string>(&operand);
        return o && *o == *s;
    }
    const auto* o = std::get_if<double>(&operand);
    return o && *o == std::get<double>(attr);
}

bool predicate_holds(const Predicate& p, const AttrValue& attr) {
    return std::visit(
        [&](const auto& pred) -> bool {
            using T = std::decay_t<decltype(pred)>;
            if constexpr (std::is_same_v<T, Eq>) {
                return scalar_matches(pred.value, attr);
            } else if constexpr (std::is_same_v<T, In>) {
                return std::any_of(pred.values.begin(), pred.values.end(),
                                   [&](const Scalar& s) { return scalar_matches(s, attr); });
            } else {
                const auto* v = std::get_if<double>(&attr);
                if (!v) return false;
                if constexpr (std::is_same_v<T, Lt>) return *v < pred.value;
                if constexpr (std::is_same_v<T, Gt>) return *v > pred.value;
                if constexpr (std::is_same_v<T, Between>) return pred.lo <= *v && *v <= pred.hi;
            }
        },
        p);
}

}  // namespace

bool matches(const FilterExpr& expr, const AttrMap& attrs) {
    for (const auto& clause : expr.clauses()) {
        auto it = attrs.find(clause.column);
        if (it == attrs.end() || !predicate_holds(clause.predicate, it->second)) return false;
    }
    return true;
}

}  // namespace hyst
