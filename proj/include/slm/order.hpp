#pragma once

#include <span>
#include <string>
#include <vector>

#include "slm/bundle.hpp"
#include "slm/empirical.hpp"

namespace slm {

enum class OrderVerdict { holds, fails, inconclusive };

// One test function's signed gap between two laws: integral under the first
// law minus integral under the second. The order requires every gap <= 0 up
// to noise.
struct OrderEntry {
  double k = 0.0;   // hinge knee; NaN for the linear member
  double gap = 0.0;
  double se = 0.0;  // combined standard error of the gap
  double z = 0.0;   // gap / se; 0 when both vanish
};

struct OrderReport {
  std::string family;
  std::vector<OrderEntry> hinges;  // f_k(x) = (k - x)^+ over the grid
  OrderEntry linear;               // f(x) = -x
  OrderVerdict verdict = OrderVerdict::inconclusive;
  double witness_k = 0.0;  // knee of the strongest violation when fails; NaN otherwise
  double max_z = 0.0;      // largest z over the whole family
};

// Evenly spaced knees covering the pooled samples with a 25% headroom margin.
std::vector<double> default_k_grid(const EmpiricalLaw& nu, const EmpiricalLaw& mu,
                                   int n_points = 101);

// Convex-decreasing stochastic dominance check between empirical laws on
// [0, inf). The full order quantifies over every convex decreasing test
// function; hinges (k - x)^+ together with -x generate that cone for
// integrable laws, so a dense knee grid decides the order up to grid
// resolution and Monte Carlo noise (the knee spacing is the tolerance knob).
// A violation needs a gap above 3 combined standard errors; the verdict
// `fails` carries the witness knee.
OrderReport cdo_leq(const EmpiricalLaw& nu, const EmpiricalLaw& mu,
                    std::span<const double> k_grid);
OrderReport cdo_leq(const EmpiricalLaw& nu, const EmpiricalLaw& mu);

// Supermartingale check of the dominance gap Z - X along recorded nodes.
struct GapPairCheck {
  int node_s = 0;  // conditioning grid node
  int node_t = 0;  // target grid node
  int n_bins = 0;
  int n_violating = 0;     // bins whose conditional mean exceeds center + 3 se
  double max_excess_z = 0.0;
};

struct GapReport {
  long n_paths_used = 0;
  long n_violating_paths = 0;  // paths where Z < X at some checked node
  std::vector<GapPairCheck> pairs;
  bool holds = false;
};

// For each adjacent node pair (s, t), bins the gap at s and requires the
// conditional mean of the gap at t to stay below the bin center within 3
// per-bin standard errors. Pathwise domination Z >= X is a precondition:
// violating paths are counted, and more than 0.1% of them rejects the input.
GapReport supermartingale_gap(const PathBundle& z_bundle, const PathBundle& x_bundle,
                              std::span<const int> nodes, int comp_z = 0, int comp_x = 0,
                              int n_bins = 10);

}  // namespace slm
