#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "slm/grid.hpp"

namespace slm {

enum class PathStatus : std::uint8_t { alive, exploded, stopped, invalid };

// Which grid nodes to materialize. Empty node list means every node.
// Recording is orthogonal to integration: it never changes the draws.
struct RecordSpec {
  std::vector<int> nodes;

  static RecordSpec all() { return {}; }
  static RecordSpec only(std::vector<int> n) { return {std::move(n)}; }
};

// Monte Carlo paths on a shared grid. Storage is [path][recorded node][component].
// Paths flagged exploded/stopped/invalid are frozen at the last valid value
// from the flag node onward.
struct PathBundle {
  TimeGrid grid;
  std::vector<int> recorded;  // sorted grid node indices
  int n_paths = 0;
  int n_components = 0;
  std::vector<std::string> names;
  std::vector<double> values;
  std::vector<PathStatus> status;
  std::vector<int> flag_node;  // grid node where the status changed; -1 if alive
  std::vector<double> weights;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  int slot(int grid_node) const {
    for (int i = 0; i < static_cast<int>(recorded.size()); ++i)
      if (recorded[i] == grid_node) return i;
    return -1;
  }

  double at(int path, int slot_index, int comp) const {
    return values[(static_cast<std::size_t>(path) * recorded.size() + slot_index) *
                      n_components +
                  comp];
  }

  std::span<const double> state(int path, int slot_index) const {
    return {&values[(static_cast<std::size_t>(path) * recorded.size() + slot_index) *
                    n_components],
            static_cast<std::size_t>(n_components)};
  }
};

struct McEstimate {
  double mean = 0.0;
  double se = 0.0;
  double n_effective = 0.0;  // (sum w)^2 / sum w^2
  long n_used = 0;
  long n_invalid = 0;
};

// Weighted mean with self-normalized standard error.
McEstimate weighted_mean(std::span<const double> xs, std::span<const double> ws);
McEstimate plain_mean(std::span<const double> xs);

enum class ExplodedPolicy {
  frozen,  // exploded paths contribute their frozen value
  zero,    // exploded paths contribute zero (mass accounting for nonnegative processes)
};

// Mean of one component at one recorded grid node. Invalid paths are excluded
// and counted; throws if grid_node was not recorded.
McEstimate mc_mean(const PathBundle& b, int grid_node, int component,
                   ExplodedPolicy policy = ExplodedPolicy::frozen);

}  // namespace slm
