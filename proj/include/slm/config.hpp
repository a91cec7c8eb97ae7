#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace slm {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// TOML-style key/value document: bare keys, `[section]` headers (folded into
// dotted keys), numbers, booleans, double-quoted strings, `#` comments.
// Lookups use the dotted form ("stochvol.sigma1"). Later assignments win,
// which is also how command-line overrides are layered on top.
class Config {
 public:
  Config() = default;

  static Config parse(std::string_view text, const std::string& origin = "<memory>");
  static Config parse_file(const std::string& path);

  bool has(const std::string& key) const;

  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  std::int64_t integer(const std::string& key) const;  // rejects non-integral numbers
  std::int64_t integer_or(const std::string& key, std::int64_t fallback) const;
  bool boolean_or(const std::string& key, bool fallback) const;
  std::string str(const std::string& key) const;
  std::string str_or(const std::string& key, const std::string& fallback) const;

  void set_number(const std::string& key, double v);
  void set_string(const std::string& key, const std::string& v);

  std::vector<std::string> keys() const;  // sorted

 private:
  struct Value {
    enum class Kind { number, boolean, string } kind;
    double num = 0.0;
    bool flag = false;
    std::string text;
  };
  std::map<std::string, Value> values_;
  std::string origin_ = "<memory>";

  const Value& get(const std::string& key, Value::Kind want) const;
};

}  // namespace slm
