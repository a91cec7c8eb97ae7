#pragma once
// Scenario report model: named checks plus optional CSV tables, serialized
// deterministically so identical runs produce byte-identical files.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace slm {

// Where a checked statement comes from: a claim under test, a consequence
// worked out from such claims, or bookkeeping that needs no argument.
enum class Provenance { paper, derived, trivial };

const char* to_string(Provenance p);

// One named assertion with its measured value, target, tolerance and outcome.
// `statement` is a self-contained description of what is being checked.
struct CheckRecord {
  std::string name;
  double value = 0.0;
  double target = 0.0;
  double tol = 0.0;   // |value - target| <= tol when z is not used
  double z = 0.0;     // standardized distance when a Monte Carlo se exists
  bool pass = false;
  bool inconclusive = false;  // true when the check could not resolve
  Provenance tag = Provenance::derived;
  std::string statement;
};

// A small rectangular table destined for a CSV file next to the report.
struct CsvTable {
  std::string name;                       // file stem, e.g. "curve"
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

struct ScenarioReport {
  int schema_version = 1;
  std::string scenario;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, double>> params;  // insertion order kept
  std::vector<CheckRecord> checks;
  std::vector<CsvTable> tables;

  void param(const std::string& key, double value);
  bool pass() const;           // every check passed or was inconclusive-free
  bool inconclusive() const;   // no failures but at least one unresolved check
  int exit_code() const;       // 0 pass, 1 failure, 3 inconclusive

  std::string to_json() const;
  static std::string to_csv(const CsvTable& table);

  // Writes <out_dir>/<scenario>.json plus one CSV per table and returns the
  // list of files written. Creates out_dir if needed.
  std::vector<std::string> write_files(const std::string& out_dir) const;
};

}  // namespace slm
