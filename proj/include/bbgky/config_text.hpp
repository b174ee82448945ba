// Plain-text configuration blocks: a TOML subset.
//
//   # comment
//   key = 1.5
//   name = "text"
//   flag = true
//   list = [1, 2, 3]
//   [section.sub]
//   key = ...
//
// Parsed into a nlohmann::json object; dotted section headers become nested
// objects. Inline tables, multi-line arrays and dates are not supported.
#pragma once

#include <json.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bbgky {

using Json = nlohmann::json;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

Json parse_config_text(std::string_view text);
Json read_config_file(const std::string& path);

/// Serialises a (nested) object back to the same text format, sections sorted.
std::string to_config_text(const Json& table);

// Typed lookups that raise ConfigError with the full key path on mismatch.
double get_number(const Json& table, const std::string& key);
double get_number(const Json& table, const std::string& key, double fallback);
std::int64_t get_integer(const Json& table, const std::string& key);
std::int64_t get_integer(const Json& table, const std::string& key, std::int64_t fallback);
std::string get_string(const Json& table, const std::string& key);
std::string get_string(const Json& table, const std::string& key, const std::string& fallback);
const Json& get_table(const Json& table, const std::string& key);

} // namespace bbgky
