#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace metascat {

// Minimal TOML-subset reader for experiment configs: [section] headers,
// key = value lines with strings, numbers, booleans and flat arrays, plus
// '#' comments. Enough for the experiment files this project uses.
class TomlConfig {
 public:
  static TomlConfig parse(const std::string& text);
  static TomlConfig parse_file(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_number(const std::string& section, const std::string& key, double fallback) const;
  long get_int(const std::string& section, const std::string& key, long fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<double> get_number_array(const std::string& section, const std::string& key) const;
  std::vector<std::string> get_string_array(const std::string& section,
                                            const std::string& key) const;

  // Canonical dump of every parsed entry, for config hashing.
  std::string canonical_string() const;

 private:
  struct Value {
    enum class Kind { string, number, boolean, array } kind = Kind::string;
    std::string str;
    double num = 0.0;
    bool b = false;
    std::vector<Value> items;
  };

  static Value parse_value(const std::string& raw, int line_no);
  const Value* find(const std::string& section, const std::string& key) const;

  std::map<std::string, std::map<std::string, Value>> sections_;
};

}  // namespace metascat
