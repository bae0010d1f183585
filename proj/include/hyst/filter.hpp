#pragma once

#include "hyst/corpus.hpp"

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace hyst {

using Scalar = std::variant<std::string, double>;

struct Eq {
    Scalar value;
    bool operator==(const Eq&) const = default;
};
// Non-empty, deduplicated.
struct In {
    std::vector<Scalar> values;
    bool operator==(const In&) const = default;
};
struct Lt {
    double value = 0;
    bool operator==(const Lt&) const = default;
};
struct Gt {
    double value = 0;
    bool operator==(const Gt&) const = default;
};
// Inclusive on both ends, lo <= hi.
struct Between {
    double lo = 0;
    double hi = 0;
    bool operator==(const Between&) const = default;
};

using Predicate = std::variant<Eq, In, Lt, Gt, Between>;

struct Clause {
    std::string column;
    Predicate predicate;
    bool operator==(const Clause&) const = default;
};

// Implicit conjunction of per-column predicates. Clause order is preserved so the
// wire form prints back in the order it was produced. An empty filter matches everything.
class FilterExpr {
public:
    FilterExpr() = default;

    static FilterExpr universal() { return {}; }

    bool is_universal() const { return clauses_.empty(); }
    const std::vector<Clause>& clauses() const { return clauses_; }
    std::size_t size() const { return clauses_.size(); }
    const Predicate* find(std::string_view column) const;

    // Throws ParseError if the column already has a predicate.
    void add(std::string column, Predicate predicate);

    nlohmann::ordered_json to_json() const;
    std::string dump() const { return to_json().dump(); }

    bool operator==(const FilterExpr&) const = default;

private:
    std::vector<Clause> clauses_;
};

// Parses the `{"COL": {"$op": operand}, ...}` dialect ($eq, $in, $lt, $gt, $between).
FilterExpr parse_filter(std::string_view raw);
FilterExpr filter_from_json(const nlohmann::ordered_json& j);

struct DroppedClause {
    std::string column;
    std::string reason;  // "unknown column", "unknown value", "type mismatch", "duplicate column"
    std::string detail;
    bool operator==(const DroppedClause&) const = default;
};

struct ValueCorrection {
    std::string column;
    std::string raw;
    std::string matched;
    bool operator==(const ValueCorrection&) const = default;
};

struct ValidationReport {
    FilterExpr accepted;
    std::vector<DroppedClause> dropped_clauses;
    std::vector<ValueCorrection> value_corrections;
    std::vector<std::string> warnings;

    nlohmann::ordered_json to_json() const;
};

// Never throws: bad clauses are dropped and reported.
ValidationReport validate(const FilterExpr& expr, const Schema& schema);

bool matches(const FilterExpr& expr, const AttrMap& attrs);
inline bool matches(const FilterExpr& expr, const Record& record) { return matches(expr, record.attrs); }

}  // namespace hyst
