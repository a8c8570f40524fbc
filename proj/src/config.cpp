#include "fairaudit/config.hpp"

#include <fstream>
#include <sstream>

#include "fairaudit/errors.hpp"
#include "json.hpp"

namespace fairaudit {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

// Strips a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

std::string parse_scalar(const std::string& raw, long line_no) {
  std::string s = trim(raw);
  if (s.empty()) throw ParseError("empty value", line_no);
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') throw ParseError("unterminated string", line_no);
    return s.substr(1, s.size() - 2);
  }
  return s;
}

std::vector<std::string> parse_array(const std::string& raw, long line_no) {
  std::string body = trim(raw);
  body = body.substr(1, body.size() - 2);
  std::vector<std::string> out;
  std::string current;
  bool quoted = false;
  for (char c : body) {
    if (c == '"') quoted = !quoted;
    if (c == ',' && !quoted) {
      if (!trim(current).empty()) out.push_back(parse_scalar(current, line_no));
      current.clear();
      continue;
    }
    current.push_back(c);
  }
  if (quoted) throw ParseError("unterminated string in array", line_no);
  if (!trim(current).empty()) out.push_back(parse_scalar(current, line_no));
  return out;
}

}  // namespace

ConfigTable parse_config_text(const std::string& text) {
  ConfigTable table;
  std::istringstream in(text);
  std::string line;
  std::string section;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string content = trim(strip_comment(line));
    if (content.empty()) continue;
    if (content.front() == '[') {
      if (content.back() != ']') throw ParseError("malformed section header", line_no);
      section = trim(content.substr(1, content.size() - 2));
      continue;
    }
    const auto eq = content.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
    std::string key = trim(content.substr(0, eq));
    if (key.empty()) throw ParseError("empty key", line_no);
    if (!section.empty()) key = section + "." + key;
    const std::string value = trim(content.substr(eq + 1));
    if (!value.empty() && value.front() == '[') {
      if (value.back() != ']') throw ParseError("arrays must close on the same line", line_no);
      table[key] = parse_array(value, line_no);
    } else {
      table[key] = parse_scalar(value, line_no);
    }
  }
  return table;
}

ConfigTable read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  if (path.extension() != ".json") return parse_config_text(buffer.str());

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(buffer.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON config: ") + e.what(), 0);
  }
  if (!doc.is_object()) throw ParseError("JSON config must be an object", 0);
  ConfigTable table;
  auto scalar = [](const nlohmann::json& v) {
    return v.is_string() ? v.get<std::string>() : v.dump();
  };
  for (const auto& [key, value] : doc.items()) {
    if (value.is_array()) {
      std::vector<std::string> items;
      for (const auto& item : value) items.push_back(scalar(item));
      table[key] = std::move(items);
    } else {
      table[key] = scalar(value);
    }
  }
  return table;
}

}  // namespace fairaudit
