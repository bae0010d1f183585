#include "hyst/corpus.hpp"

#include "hyst/error.hpp"
#include "hyst/text.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <set>
#include <unordered_set>

namespace hyst {

using nlohmann::json;

namespace {

bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    auto head = s.front();
    if (!(std::isalpha(static_cast<unsigned char>(head)) || head == '_')) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
}

ColumnKind parse_kind(const json& j, const std::string& column) {
    std::vector<std::string> kinds;
    if (j.is_string()) {
        kinds.push_back(j.get<std::string>());
    } else if (j.is_array()) {
        for (const auto& k : j) {
            if (!k.is_string()) throw SchemaError("column " + column + ": kind entries must be strings");
            kinds.push_back(k.get<std::string>());
        }
    } else {
        throw SchemaError("column " + column + ": missing or invalid kind");
    }
    std::set<std::string> distinct(kinds.begin(), kinds.end());
    if (distinct.size() != 1) {
        throw SchemaError("column " + column + ": exactly one kind required");
    }
    const auto& k = *distinct.begin();
    if (k == "single") return ColumnKind::Single;
    if (k == "multiple") return ColumnKind::Multiple;
    if (k == "numeric") return ColumnKind::Numeric;
    throw SchemaError("column " + column + ": unknown kind '" + k + "'");
}

template <typename T>
void push_unique(std::vector<T>& out, T value) {
    if (std::find(out.begin(), out.end(), value) == out.end()) out.push_back(std::move(value));
}

}  // namespace

std::string_view to_string(ColumnKind kind) {
    switch (kind) {
        case ColumnKind::Single: return "single";
        case ColumnKind::Multiple: return "multiple";
        case ColumnKind::Numeric: return "numeric";
    }
    return "single";
}

Schema::Schema(std::vector<ColumnSpec> columns) : columns_(std::move(columns)) {
    std::unordered_set<std::string> seen;
    for (auto& c : columns_) {
        if (!is_identifier(c.name)) throw SchemaError("invalid column name '" + c.name + "'");
        if (!seen.insert(to_lower(c.name)).second) throw SchemaError("duplicate column " + c.name);
        if (c.allowable_values) {
            if (c.kind == ColumnKind::Numeric) {
                throw SchemaError("numeric column " + c.name + " cannot declare allowable values");
            }
            if (c.allowable_values->empty()) {
                throw SchemaError("column " + c.name + ": allowable_values must be non-empty");
            }
            std::vector<std::string> unique;
            for (auto& v : *c.allowable_values) push_unique(unique, std::move(v));
            *c.allowable_values = std::move(unique);
        }
    }
}

const ColumnSpec* Schema::find(std::string_view name) const {
    for (const auto& c : columns_) {
        if (iequals(c.name, name)) return &c;
    }
    return nullptr;
}

json Schema::to_json() const {
    json cols = json::array();
    for (const auto& c : columns_) {
        json col = {{"name", c.name}, {"kind", std::string(hyst::to_string(c.kind))}};
        if (c.allowable_values) col["allowable_values"] = *c.allowable_values;
        cols.push_back(std::move(col));
    }
    return json{{"columns", std::move(cols)}};
}

Schema Schema::from_json(const json& j) {
    if (!j.is_object() || !j.contains("columns") || !j["columns"].is_array()) {
        throw SchemaError("schema must be an object with a \"columns\" array");
    }
    std::vector<ColumnSpec> columns;
    for (const auto& col : j["columns"]) {
        if (!col.is_object() || !col.contains("name") || !col["name"].is_string()) {
            throw SchemaError("each column needs a string \"name\"");
        }
        ColumnSpec spec;
        spec.name = col["name"].get<std::string>();
        spec.kind = parse_kind(col.value("kind", json()), spec.name);
        if (col.contains("allowable_values") && !col["allowable_values"].is_null()) {
            const auto& av = col["allowable_values"];
            if (!av.is_array()) throw SchemaError("column " + spec.name + ": allowable_values must be an array");
            std::vector<std::string> values;
            for (const auto& v : av) {
                if (!v.is_string()) throw SchemaError("column " + spec.name + ": allowable values must be strings");
                values.push_back(v.get<std::string>());
            }
            spec.allowable_values = std::move(values);
        }
        columns.push_back(std::move(spec));
    }
    return Schema(std::move(columns));
}

Schema Schema::parse(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("schema: ") + e.what());
    }
    return from_json(j);
}

Schema load_schema(const std::string& path) { return Schema::parse(read_file(path)); }

std::string attr_to_string(const AttrValue& v) {
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    if (const auto* d = std::get_if<double>(&v)) return format_number(*d);
    const auto& list = std::get<std::vector<std::string>>(v);
    std::string out;
    for (std::size_t i = 0; i < list.size(); ++i) {
        if (i) out += "; ";
        out += list[i];
    }
    return out;
}

json record_to_json(const Record& r) {
    json attrs = json::object();
    for (const auto& [k, v] : r.attrs) {
        std::visit([&](const auto& x) { attrs[k] = x; }, v);
    }
    json j = {{"id", r.id}, {"attrs", std::move(attrs)}, {"text", r.text}};
    if (r.embedding) j["embedding"] = *r.embedding;
    return j;
}

Record record_from_json(const json& j) {
    Record r;
    r.id = j.at("id").get<std::string>();
    r.text = j.at("text").get<std::string>();
    for (const auto& [k, v] : j.at("attrs").items()) {
        if (v.is_string()) {
            r.attrs.emplace(k, v.get<std::string>());
        } else if (v.is_number()) {
            r.attrs.emplace(k, v.get<double>());
        } else if (v.is_array()) {
            r.attrs.emplace(k, v.get<std::vector<std::string>>());
        } else {
            throw ParseError("record " + r.id + ": invalid attr " + k);
        }
    }
    if (j.contains("embedding")) r.embedding = j["embedding"].get<std::vector<double>>();
    return r;
}

namespace {

struct RowError {
    std::string message;
};

std::string row_id(const json& row) {
    if (!row.contains("id")) throw RowError{"missing \"id\""};
    const auto& id = row["id"];
    if (id.is_string()) {
        auto s = id.get<std::string>();
        if (s.empty()) throw RowError{"empty \"id\""};
        return s;
    }
    if (id.is_number_integer()) return std::to_string(id.get<long long>());
    if (id.is_number_unsigned()) return std::to_string(id.get<unsigned long long>());
    throw RowError{"\"id\" must be a string or integer"};
}

std::optional<AttrValue> row_attr(const json& v, const ColumnSpec& col) {
    if (v.is_null()) return std::nullopt;
    switch (col.kind) {
        case ColumnKind::Numeric:
            if (!v.is_number()) throw RowError{"column " + col.name + " expects a number"};
            return AttrValue{v.get<double>()};
        case ColumnKind::Single:
            if (v.is_string()) return AttrValue{v.get<std::string>()};
            if (v.is_number()) return AttrValue{v.get<double>()};
            throw RowError{"column " + col.name + " expects a scalar"};
        case ColumnKind::Multiple: {
            std::vector<std::string> list;
            if (v.is_string()) {
                list.push_back(v.get<std::string>());
            } else if (v.is_array()) {
                for (const auto& e : v) {
                    if (!e.is_string()) throw RowError{"column " + col.name + " expects a list of strings"};
                    push_unique(list, e.get<std::string>());
                }
            } else {
                throw RowError{"column " + col.name + " expects a list of strings"};
            }
            if (list.empty()) return std::nullopt;
            return AttrValue{std::move(list)};
        }
    }
    return std::nullopt;
}

std::optional<std::string> text_part(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number()) return format_number(v.get<double>());
    if (v.is_array()) {
        std::string out;
        bool first = true;
        for (const auto& e : v) {
            auto part = text_part(e);
            if (!part) continue;
            if (!first) out += kTextSeparator;
            out += *part;
            first = false;
        }
        return out;
    }
    return std::nullopt;
}

}  // namespace

IngestResult ingest(std::istream& in, const Schema& schema, const std::vector<std::string>& text_fields) {
    IngestResult result;
    std::unordered_set<std::string> ids;
    bool any_text_field = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            json row;
            try {
                row = json::parse(line);
            } catch (const json::parse_error& e) {
                throw RowError{std::string("invalid JSON: ") + e.what()};
            }
            if (!row.is_object()) throw RowError{"row is not a JSON object"};

            Record rec;
            rec.id = row_id(row);
            for (const auto& [key, value] : row.items()) {
                if (key == "id") continue;
                const auto* col = schema.find(key);
                if (!col || col->name != key) continue;
                if (auto attr = row_attr(value, *col)) rec.attrs.emplace(col->name, std::move(*attr));
            }
            bool first = true;
            for (const auto& field : text_fields) {
                auto it = row.find(field);
                if (it == row.end()) continue;
                any_text_field = true;
                auto part = text_part(*it);
                if (!part) continue;
                if (!first) rec.text += kTextSeparator;
                rec.text += *part;
                first = false;
            }
            if (!ids.insert(rec.id).second) {
                throw IngestError("duplicate id '" + rec.id + "' at line " + std::to_string(line_no));
            }
            result.records.push_back(std::move(rec));
        } catch (const RowError& e) {
            result.skipped.push_back({line_no, e.message});
        }
    }
    if (!result.records.empty() && !text_fields.empty() && !any_text_field) {
        throw IngestError("none of the text fields appear in any row");
    }
    return result;
}

IngestResult ingest(const std::string& path, const Schema& schema, const std::vector<std::string>& text_fields) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open corpus: " + path);
    return ingest(in, schema, text_fields);
}

std::string linearize(const Record& record, const Schema& schema) {
    std::string out;
    for (const auto& col : schema.columns()) {
        auto it = record.attrs.find(col.name);
        if (it == record.attrs.end()) continue;
        out += col.name;
        out += ": ";
        out += attr_to_string(it->second);
        out += ", ";
    }
    out += "text: ";
    out += record.text;
    return out;
}

}  // namespace hyst
