#include "metascat/tomlmini.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "metascat/util.hpp"

namespace metascat {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// strip a trailing comment that is not inside a quoted string
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

}  // namespace

TomlConfig::Value TomlConfig::parse_value(const std::string& raw, int line_no) {
  const std::string v = trim(raw);
  if (v.empty()) throw std::runtime_error("config line " + std::to_string(line_no) + ": empty value");
  Value out;
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"')
      throw std::runtime_error("config line " + std::to_string(line_no) + ": unterminated string");
    out.kind = Value::Kind::string;
    out.str = v.substr(1, v.size() - 2);
    return out;
  }
  if (v == "true" || v == "false") {
    out.kind = Value::Kind::boolean;
    out.b = v == "true";
    return out;
  }
  if (v.front() == '[') {
    if (v.back() != ']')
      throw std::runtime_error("config line " + std::to_string(line_no) + ": unterminated array");
    out.kind = Value::Kind::array;
    std::string body = v.substr(1, v.size() - 2);
    std::string cur;
    bool quoted = false;
    for (char ch : body) {
      if (ch == '"') quoted = !quoted;
      if (ch == ',' && !quoted) {
        if (!trim(cur).empty()) out.items.push_back(parse_value(cur, line_no));
        cur.clear();
      } else {
        cur.push_back(ch);
      }
    }
    if (!trim(cur).empty()) out.items.push_back(parse_value(cur, line_no));
    return out;
  }
  char* end = nullptr;
  out.num = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw std::runtime_error("config line " + std::to_string(line_no) + ": cannot parse value '" +
                             v + "'");
  out.kind = Value::Kind::number;
  return out;
}

TomlConfig TomlConfig::parse(const std::string& text) {
  TomlConfig cfg;
  std::istringstream is(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("config line " + std::to_string(line_no) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    cfg.sections_[section][key] = parse_value(line.substr(eq + 1), line_no);
  }
  return cfg;
}

TomlConfig TomlConfig::parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse(ss.str());
}

const TomlConfig::Value* TomlConfig::find(const std::string& section, const std::string& key) const {
  const auto sit = sections_.find(section);
  if (sit == sections_.end()) return nullptr;
  const auto kit = sit->second.find(key);
  return kit == sit->second.end() ? nullptr : &kit->second;
}

bool TomlConfig::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

std::string TomlConfig::get_string(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
  const Value* v = find(section, key);
  if (!v) return fallback;
  if (v->kind != Value::Kind::string)
    throw std::runtime_error("config [" + section + "] " + key + ": expected a string");
  return v->str;
}

double TomlConfig::get_number(const std::string& section, const std::string& key,
                              double fallback) const {
  const Value* v = find(section, key);
  if (!v) return fallback;
  if (v->kind != Value::Kind::number)
    throw std::runtime_error("config [" + section + "] " + key + ": expected a number");
  return v->num;
}

long TomlConfig::get_int(const std::string& section, const std::string& key, long fallback) const {
  return static_cast<long>(get_number(section, key, static_cast<double>(fallback)));
}

bool TomlConfig::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  const Value* v = find(section, key);
  if (!v) return fallback;
  if (v->kind != Value::Kind::boolean)
    throw std::runtime_error("config [" + section + "] " + key + ": expected a boolean");
  return v->b;
}

std::vector<double> TomlConfig::get_number_array(const std::string& section,
                                                 const std::string& key) const {
  const Value* v = find(section, key);
  std::vector<double> out;
  if (!v) return out;
  if (v->kind != Value::Kind::array)
    throw std::runtime_error("config [" + section + "] " + key + ": expected an array");
  for (const auto& item : v->items) {
    if (item.kind != Value::Kind::number)
      throw std::runtime_error("config [" + section + "] " + key + ": expected numbers");
    out.push_back(item.num);
  }
  return out;
}

std::vector<std::string> TomlConfig::get_string_array(const std::string& section,
                                                      const std::string& key) const {
  const Value* v = find(section, key);
  std::vector<std::string> out;
  if (!v) return out;
  if (v->kind != Value::Kind::array)
    throw std::runtime_error("config [" + section + "] " + key + ": expected an array");
  for (const auto& item : v->items) {
    if (item.kind != Value::Kind::string)
      throw std::runtime_error("config [" + section + "] " + key + ": expected strings");
    out.push_back(item.str);
  }
  return out;
}

std::string TomlConfig::canonical_string() const {
  std::ostringstream os;
  for (const auto& [section, entries] : sections_) {
    for (const auto& [key, value] : entries) {
      os << section << '.' << key << '=';
      switch (value.kind) {
        case Value::Kind::string: os << value.str; break;
        case Value::Kind::number: os << format_double(value.num); break;
        case Value::Kind::boolean: os << (value.b ? "true" : "false"); break;
        case Value::Kind::array:
          for (const auto& item : value.items)
            os << (item.kind == Value::Kind::string ? item.str : format_double(item.num)) << '|';
          break;
      }
      os << ';';
    }
  }
  return os.str();
}

}  // namespace metascat
