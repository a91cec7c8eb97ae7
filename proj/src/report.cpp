#include "slm/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace slm {

namespace {

// Shortest decimal form that round-trips to the same double; keeps files
// byte-stable across runs and readable in diffs.
std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) break;
  }
  return buf;
}

nlohmann::ordered_json check_to_json(const CheckRecord& c) {
  nlohmann::ordered_json j;
  j["name"] = c.name;
  j["value"] = c.value;
  j["target"] = c.target;
  j["tol"] = c.tol;
  j["z"] = c.z;
  j["pass"] = c.pass;
  j["inconclusive"] = c.inconclusive;
  j["tag"] = to_string(c.tag);
  j["statement"] = c.statement;
  return j;
}

}  // namespace

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::paper: return "paper";
    case Provenance::derived: return "derived";
    case Provenance::trivial: return "trivial";
  }
  return "derived";
}

void ScenarioReport::param(const std::string& key, double value) {
  for (auto& [k, v] : params) {
    if (k == key) {
      v = value;
      return;
    }
  }
  params.emplace_back(key, value);
}

bool ScenarioReport::pass() const {
  for (const auto& c : checks)
    if (!c.pass && !c.inconclusive) return false;
  return true;
}

bool ScenarioReport::inconclusive() const {
  if (!pass()) return false;
  for (const auto& c : checks)
    if (c.inconclusive) return true;
  return false;
}

int ScenarioReport::exit_code() const {
  if (!pass()) return 1;
  return inconclusive() ? 3 : 0;
}

std::string ScenarioReport::to_json() const {
  nlohmann::ordered_json j;
  j["schema_version"] = schema_version;
  j["scenario"] = scenario;
  j["seed"] = seed;
  nlohmann::ordered_json jp;
  for (const auto& [k, v] : params) jp[k] = v;
  j["params"] = std::move(jp);
  nlohmann::ordered_json jc = nlohmann::ordered_json::array();
  for (const auto& c : checks) jc.push_back(check_to_json(c));
  j["checks"] = std::move(jc);
  j["pass"] = pass();
  j["inconclusive"] = inconclusive();
  // dump() renders non-finite numbers as null, which readers treat as
  // "not a number" rather than a parse error.
  return j.dump(2) + "\n";
}

std::string ScenarioReport::to_csv(const CsvTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out += ',';
    out += table.header[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size())
      throw std::invalid_argument("csv row width does not match header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_double(row[i]);
    }
    out += '\n';
  }
  return out;
}

std::vector<std::string> ScenarioReport::write_files(const std::string& out_dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::vector<std::string> written;

  const auto write = [&](const fs::path& path, const std::string& body) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << body;
    written.push_back(path.string());
  };

  write(fs::path(out_dir) / (scenario + ".json"), to_json());
  for (const auto& t : tables)
    write(fs::path(out_dir) / (scenario + "-" + t.name + ".csv"), to_csv(t));
  return written;
}

}  // namespace slm
