#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hyst {

// Lowercase, split on non-alphanumeric ASCII, drop empty tokens.
std::vector<std::string> tokenize(std::string_view text);

std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
std::string trim(std::string_view s);
std::string collapse_whitespace(std::string_view s);
bool has_alnum(std::string_view s);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

// Shortest round-trip decimal representation; integral values print without a fraction.
std::string format_number(double v);

// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

}  // namespace hyst
