#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace hyst {

enum class ColumnKind { Single, Multiple, Numeric };

std::string_view to_string(ColumnKind kind);

struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::Single;
    // Absent for numeric columns; non-empty when present.
    std::optional<std::vector<std::string>> allowable_values;
};

// Declared structured columns. Names are unique case-insensitively.
class Schema {
public:
    Schema() = default;
    explicit Schema(std::vector<ColumnSpec> columns);

    const std::vector<ColumnSpec>& columns() const { return columns_; }
    std::size_t size() const { return columns_.size(); }

    // Case-insensitive lookup; nullptr when absent.
    const ColumnSpec* find(std::string_view name) const;

    nlohmann::json to_json() const;
    static Schema from_json(const nlohmann::json& j);
    static Schema parse(std::string_view text);

private:
    std::vector<ColumnSpec> columns_;
};

Schema load_schema(const std::string& path);

// A single column holds one string or number, a multiple column a deduplicated list of strings.
using AttrValue = std::variant<std::string, double, std::vector<std::string>>;
using AttrMap = std::map<std::string, AttrValue>;

std::string attr_to_string(const AttrValue& v);

struct Record {
    std::string id;
    AttrMap attrs;
    std::string text;
    std::optional<std::vector<double>> embedding;

    bool operator==(const Record&) const = default;
};

nlohmann::json record_to_json(const Record& r);
Record record_from_json(const nlohmann::json& j);

struct RowDiagnostic {
    std::size_t line = 0;
    std::string message;
};

struct IngestResult {
    std::vector<Record> records;
    std::vector<RowDiagnostic> skipped;
};

inline constexpr std::string_view kTextSeparator = " \n ";

// Rows that fail to parse are skipped and reported; a duplicate id throws IngestError.
IngestResult ingest(std::istream& in, const Schema& schema, const std::vector<std::string>& text_fields);
IngestResult ingest(const std::string& path, const Schema& schema, const std::vector<std::string>& text_fields);

// "COL: v, COL2: a; b, text: <text>" in schema declaration order.
std::string linearize(const Record& record, const Schema& schema);

}  // namespace hyst
