#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace fairaudit {

// Value of one `key = value` entry: a scalar (kept as text) or a list.
using ConfigValue = std::variant<std::string, std::vector<std::string>>;
using ConfigTable = std::map<std::string, ConfigValue>;

// Parses the flat TOML subset used for schema files:
//
//   # comment
//   outcome = "recidivism"
//   numeric = ["age", "prior_arrests"]
//
// Keys inside a `[section]` are stored as "section.key". Scalars may be
// quoted strings, numbers or bare words; arrays hold scalars on one line.
ConfigTable parse_config_text(const std::string& text);

// Reads a config file. `.json` files are parsed as a flat JSON object with
// the same keys; anything else goes through parse_config_text.
ConfigTable read_config_file(const std::filesystem::path& path);

}  // namespace fairaudit
