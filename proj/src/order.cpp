#include "slm/order.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "slm/measure.hpp"

namespace slm {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_law(const EmpiricalLaw& law, const char* who) {
  if (law.samples.empty()) {
    std::ostringstream oss;
    oss << "cdo_leq: " << who << " law is empty";
    throw std::invalid_argument(oss.str());
  }
  for (double x : law.samples)
    if (!(x >= 0.0) || !std::isfinite(x)) {
      std::ostringstream oss;
      oss << "cdo_leq: " << who << " law has a sample outside [0, inf)";
      throw std::invalid_argument(oss.str());
    }
  if (!law.weights.empty() && law.weights.size() != law.samples.size())
    throw std::invalid_argument("cdo_leq: weight/sample length mismatch");
  for (double w : law.weights)
    if (!(w > 0.0) || !std::isfinite(w))
      throw std::invalid_argument("cdo_leq: weights must be positive");
}

double max_sample(const EmpiricalLaw& law) {
  return *std::max_element(law.samples.begin(), law.samples.end());
}

// Mean and standard error of f(X) under the law.
McEstimate law_mean(const EmpiricalLaw& law, const std::vector<double>& fx) {
  if (law.weights.empty()) return plain_mean(fx);
  return weighted_mean(fx, law.weights);
}

template <typename F>
OrderEntry entry_for(const EmpiricalLaw& nu, const EmpiricalLaw& mu, double k, F&& f) {
  std::vector<double> fx(nu.samples.size());
  for (std::size_t i = 0; i < nu.samples.size(); ++i) fx[i] = f(nu.samples[i]);
  const McEstimate a = law_mean(nu, fx);
  fx.resize(mu.samples.size());
  for (std::size_t i = 0; i < mu.samples.size(); ++i) fx[i] = f(mu.samples[i]);
  const McEstimate b = law_mean(mu, fx);

  OrderEntry e;
  e.k = k;
  e.gap = a.mean - b.mean;
  e.se = std::hypot(a.se, b.se);
  e.z = e.se > 0.0 ? e.gap / e.se : (e.gap == 0.0 ? 0.0 : std::copysign(kInf, e.gap));
  return e;
}

}  // namespace

std::vector<double> default_k_grid(const EmpiricalLaw& nu, const EmpiricalLaw& mu,
                                   int n_points) {
  validate_law(nu, "first");
  validate_law(mu, "second");
  if (n_points < 2) throw std::invalid_argument("default_k_grid: need at least 2 points");
  const double hi = 1.25 * std::max(max_sample(nu), max_sample(mu));
  std::vector<double> ks(n_points);
  for (int i = 0; i < n_points; ++i) ks[i] = hi * i / (n_points - 1);
  return ks;
}

OrderReport cdo_leq(const EmpiricalLaw& nu, const EmpiricalLaw& mu,
                    std::span<const double> k_grid) {
  validate_law(nu, "first");
  validate_law(mu, "second");
  if (k_grid.empty()) throw std::invalid_argument("cdo_leq: empty knee grid");
  double k_lo = kInf, k_hi = -kInf;
  for (double k : k_grid) {
    if (!std::isfinite(k) || k < 0.0)
      throw std::invalid_argument("cdo_leq: knees must be finite and nonnegative");
    k_lo = std::min(k_lo, k);
    k_hi = std::max(k_hi, k);
  }
  const double pooled_max = std::max(max_sample(nu), max_sample(mu));
  if (k_hi < pooled_max)
    throw std::invalid_argument("cdo_leq: knee grid must span the pooled sample range");

  OrderReport rep;
  {
    std::ostringstream oss;
    oss << "hinge (k - x)^+ on " << k_grid.size() << " knees in [" << k_lo << ", " << k_hi
        << "], plus -x";
    rep.family = oss.str();
  }

  rep.hinges.reserve(k_grid.size());
  for (double k : k_grid)
    rep.hinges.push_back(
        entry_for(nu, mu, k, [k](double x) { return std::max(k - x, 0.0); }));
  rep.linear = entry_for(nu, mu, kNan, [](double x) { return -x; });

  bool broken = false;
  rep.max_z = rep.linear.z;
  rep.witness_k = kNan;
  double witness_z = -kInf;
  for (const OrderEntry& e : rep.hinges) {
    if (!std::isfinite(e.gap) || std::isnan(e.se)) broken = true;
    rep.max_z = std::max(rep.max_z, e.z);
    if (e.z > 3.0 && e.z > witness_z) {
      witness_z = e.z;
      rep.witness_k = e.k;
    }
  }
  if (!std::isfinite(rep.linear.gap) || std::isnan(rep.linear.se)) broken = true;

  if (broken)
    rep.verdict = OrderVerdict::inconclusive;
  else if (rep.max_z > 3.0)
    rep.verdict = OrderVerdict::fails;
  else {
    rep.verdict = OrderVerdict::holds;
    rep.witness_k = kNan;
  }
  return rep;
}

OrderReport cdo_leq(const EmpiricalLaw& nu, const EmpiricalLaw& mu) {
  const std::vector<double> ks = default_k_grid(nu, mu);
  return cdo_leq(nu, mu, ks);
}

GapReport supermartingale_gap(const PathBundle& z_bundle, const PathBundle& x_bundle,
                              std::span<const int> nodes, int comp_z, int comp_x, int n_bins) {
  if (z_bundle.n_paths != x_bundle.n_paths || z_bundle.n_paths <= 0)
    throw std::invalid_argument("supermartingale_gap: bundles must share a path count");
  if (comp_z < 0 || comp_z >= z_bundle.n_components || comp_x < 0 ||
      comp_x >= x_bundle.n_components)
    throw std::invalid_argument("supermartingale_gap: component out of range");
  if (nodes.size() < 2) throw std::invalid_argument("supermartingale_gap: need >= 2 nodes");

  std::vector<int> slot_z, slot_x;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i > 0 && nodes[i] <= nodes[i - 1])
      throw std::invalid_argument("supermartingale_gap: nodes must be strictly increasing");
    const int sz = z_bundle.slot(nodes[i]);
    const int sx = x_bundle.slot(nodes[i]);
    if (sz < 0 || sx < 0)
      throw std::invalid_argument("supermartingale_gap: node not recorded in both bundles");
    slot_z.push_back(sz);
    slot_x.push_back(sx);
  }

  std::vector<int> used;
  used.reserve(z_bundle.n_paths);
  for (int p = 0; p < z_bundle.n_paths; ++p)
    if (z_bundle.status[p] != PathStatus::invalid && x_bundle.status[p] != PathStatus::invalid)
      used.push_back(p);
  if (used.empty()) throw std::invalid_argument("supermartingale_gap: no valid paths");

  GapReport rep;
  rep.n_paths_used = static_cast<long>(used.size());
  for (int p : used) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (z_bundle.at(p, slot_z[i], comp_z) < x_bundle.at(p, slot_x[i], comp_x)) {
        ++rep.n_violating_paths;
        break;
      }
    }
  }
  if (rep.n_violating_paths > 0.001 * static_cast<double>(used.size())) {
    std::ostringstream oss;
    oss << "supermartingale_gap: domination Z >= X violated on " << rep.n_violating_paths
        << " of " << used.size() << " paths (tolerance 0.1%)";
    throw std::invalid_argument(oss.str());
  }

  std::vector<double> xs(used.size()), ys(used.size());
  bool all_clean = true;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    for (std::size_t j = 0; j < used.size(); ++j) {
      const int p = used[j];
      xs[j] = z_bundle.at(p, slot_z[i], comp_z) - x_bundle.at(p, slot_x[i], comp_x);
      ys[j] = z_bundle.at(p, slot_z[i + 1], comp_z) - x_bundle.at(p, slot_x[i + 1], comp_x);
    }
    const BinnedFit fit = condexp_regress(xs, ys, {}, n_bins);

    GapPairCheck pc;
    pc.node_s = nodes[i];
    pc.node_t = nodes[i + 1];
    pc.n_bins = fit.n_bins();
    for (int b = 0; b < fit.n_bins(); ++b) {
      const double excess = fit.mean[b] - fit.center[b];
      const double z = fit.se[b] > 0.0 ? excess / fit.se[b] : (excess > 0.0 ? kInf : 0.0);
      pc.max_excess_z = std::max(pc.max_excess_z, z);
      if (excess > 3.0 * fit.se[b]) ++pc.n_violating;
    }
    if (pc.n_violating > 0) all_clean = false;
    rep.pairs.push_back(pc);
  }
  rep.holds = all_clean;
  return rep;
}

}  // namespace slm
