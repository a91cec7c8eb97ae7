#include "slm/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace slm {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

bool key_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         c == '_' || c == '-' || c == '.';
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& what) {
  throw ConfigError(origin + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

Config Config::parse(std::string_view text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    // strip comments outside of quotes
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line = line.substr(0, i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(origin, line_no, "unterminated section header");
      const std::string_view name = trim(line.substr(1, line.size() - 2));
      if (name.empty()) fail(origin, line_no, "empty section name");
      for (char c : name)
        if (!key_char(c)) fail(origin, line_no, "bad character in section name");
      section = std::string(name);
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) fail(origin, line_no, "expected key = value");
    const std::string_view key_sv = trim(line.substr(0, eq));
    const std::string_view val_sv = trim(line.substr(eq + 1));
    if (key_sv.empty()) fail(origin, line_no, "empty key");
    for (char c : key_sv)
      if (!key_char(c)) fail(origin, line_no, "bad character in key");
    if (val_sv.empty()) fail(origin, line_no, "empty value");

    const std::string key =
        section.empty() ? std::string(key_sv) : section + "." + std::string(key_sv);

    Value v;
    if (val_sv.front() == '"') {
      if (val_sv.size() < 2 || val_sv.back() != '"')
        fail(origin, line_no, "unterminated string");
      v.kind = Value::Kind::string;
      std::string out;
      for (std::size_t i = 1; i + 1 < val_sv.size(); ++i) {
        char c = val_sv[i];
        if (c == '\\') {
          if (i + 2 >= val_sv.size()) fail(origin, line_no, "dangling escape");
          const char n = val_sv[++i];
          if (n == 'n')
            c = '\n';
          else if (n == 't')
            c = '\t';
          else if (n == '"' || n == '\\')
            c = n;
          else
            fail(origin, line_no, "unknown escape");
        } else if (c == '"') {
          fail(origin, line_no, "unescaped quote inside string");
        }
        out.push_back(c);
      }
      v.text = std::move(out);
    } else if (val_sv == "true" || val_sv == "false") {
      v.kind = Value::Kind::boolean;
      v.flag = val_sv == "true";
    } else {
      v.kind = Value::Kind::number;
      const char* begin = val_sv.data();
      const char* end = val_sv.data() + val_sv.size();
      const auto res = std::from_chars(begin, end, v.num);
      if (res.ec != std::errc{} || res.ptr != end)
        fail(origin, line_no, "malformed value '" + std::string(val_sv) + "'");
    }
    cfg.values_[key] = std::move(v);  // later assignments win
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

bool Config::has(const std::string& key) const { return values_.count(key) != 0; }

const Config::Value& Config::get(const std::string& key, Value::Kind want) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(origin_ + ": missing key '" + key + "'");
  if (it->second.kind != want)
    throw ConfigError(origin_ + ": key '" + key + "' has the wrong type");
  return it->second;
}

double Config::number(const std::string& key) const {
  return get(key, Value::Kind::number).num;
}

double Config::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

std::int64_t Config::integer(const std::string& key) const {
  const double v = number(key);
  const double r = std::nearbyint(v);
  if (v != r || std::fabs(v) > 9.0e18)
    throw ConfigError(origin_ + ": key '" + key + "' is not an integer");
  return static_cast<std::int64_t>(r);
}

std::int64_t Config::integer_or(const std::string& key, std::int64_t fallback) const {
  return has(key) ? integer(key) : fallback;
}

bool Config::boolean_or(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  return get(key, Value::Kind::boolean).flag;
}

std::string Config::str(const std::string& key) const {
  return get(key, Value::Kind::string).text;
}

std::string Config::str_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? str(key) : fallback;
}

void Config::set_number(const std::string& key, double v) {
  Value val;
  val.kind = Value::Kind::number;
  val.num = v;
  values_[key] = val;
}

void Config::set_string(const std::string& key, const std::string& v) {
  Value val;
  val.kind = Value::Kind::string;
  val.text = v;
  values_[key] = val;
}

std::vector<std::string> Config::keys() const {
  std::vector<std::string> out;
  out.reserve(values_.size());
  for (const auto& [k, v] : values_) out.push_back(k);
  return out;
}

}  // namespace slm
