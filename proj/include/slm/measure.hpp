#pragma once

#include <functional>
#include <span>
#include <vector>

#include "slm/bundle.hpp"
#include "slm/empirical.hpp"

namespace slm {

// Exponential-density integrand: one coefficient per driving Brownian
// component of a bundle, evaluated on the state at the left node of each step.
struct IntegrandSpec {
  std::vector<int> drivers;  // bundle component indices of the driving Brownians
  // writes alpha[j] for driver j given the full recorded state row and time
  std::function<void(std::span<const double> state, double t, std::span<double> alpha)> alpha;
  bool bounded = false;  // declaration only, carried into diagnostics
};

// Pathwise positive density Z with Z_0 = 1, aligned with a bundle's grid.
struct DensityPath {
  std::vector<int> recorded;
  int n_paths = 0;
  std::vector<double> z;           // [path][slot]
  std::vector<PathStatus> status;  // invalid when the integrand went non-finite
  long n_invalid = 0;
  McEstimate terminal;  // mean of terminal Z over valid paths

  double at(int path, int slot) const {
    return z[static_cast<std::size_t>(path) * recorded.size() + slot];
  }
};

// log Z_{k+1} = log Z_k + sum_i alpha_i dB_i - (1/2) sum_i alpha_i^2 h, with
// alpha evaluated at the left node. Requires every grid node recorded.
// Paths frozen in the bundle keep Z constant from their flag node on.
DensityPath doleans(const PathBundle& bundle, const IntegrandSpec& spec);

// Realized covariation sum_k (a_{k+1}-a_k)(b_{k+1}-b_k) per path, averaged.
// The series callbacks map (path, slot) to a value.
using PathSeries = std::function<double(int path, int slot)>;
McEstimate covariation(int n_paths, int n_slots, const PathSeries& a, const PathSeries& b);
PathSeries series_of(const PathBundle& bundle, int comp);  // keeps a reference
PathSeries series_of(const DensityPath& density);          // keeps a reference

struct ReweightedLaw {
  EmpiricalLaw law;
  double effective_size = 0.0;
  bool degenerate = false;  // effective sample size below 100
};

// Law of one component at a node under the measure with density Z at that
// node: the Z-weighted empirical law, weights normalized to sum to n_valid.
ReweightedLaw reweighted_law(const PathBundle& bundle, const DensityPath& density, int node,
                             int comp);

// Piecewise-linear conditional-mean estimate on quantile bins.
struct BinnedFit {
  std::vector<double> center;  // weighted mean of the conditioning variable per bin
  std::vector<double> mean;    // weighted mean of the target per bin
  std::vector<double> se;      // per-bin standard error
  std::vector<double> n_eff;   // per-bin effective count

  int n_bins() const { return static_cast<int>(center.size()); }
  double operator()(double x) const;  // linear interpolation between centers
};

// Weighted bin means of ys on quantile bins of xs; empty weights = uniform.
// Requires at least 3 bins and at least 50 points per bin.
BinnedFit condexp_regress(std::span<const double> xs, std::span<const double> ys,
                          std::span<const double> weights, int n_bins);

struct BinZScores {
  std::vector<double> center;
  std::vector<double> mean;
  std::vector<double> se;
  std::vector<double> z;  // (mean - 1) / se

  int n_bins() const { return static_cast<int>(center.size()); }
  double max_abs_z() const;
};

// Bin means of the density values against the conditioning variable, with
// z-scores against the constant 1.
BinZScores unit_conditional_density_check(std::span<const double> cond,
                                          std::span<const double> density_values, int n_bins);
BinZScores unit_conditional_density_check(const PathBundle& bundle, const DensityPath& density,
                                          std::span<const double> cond, int node, int n_bins);

}  // namespace slm
