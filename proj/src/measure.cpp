#include "slm/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "slm/sde.hpp"

namespace slm {

namespace {

void require_full_grid(const PathBundle& b) {
  const int n_nodes = b.grid.n_nodes();
  if (static_cast<int>(b.recorded.size()) != n_nodes)
    throw std::invalid_argument("doleans: bundle must record every grid node");
  for (int k = 0; k < n_nodes; ++k)
    if (b.recorded[k] != k)
      throw std::invalid_argument("doleans: bundle must record every grid node");
}

}  // namespace

DensityPath doleans(const PathBundle& bundle, const IntegrandSpec& spec) {
  require_full_grid(bundle);
  if (!spec.alpha) throw std::invalid_argument("doleans: missing integrand");
  if (spec.drivers.empty()) throw std::invalid_argument("doleans: no drivers");
  for (int d : spec.drivers)
    if (d < 0 || d >= bundle.n_components)
      throw std::invalid_argument("doleans: driver component out of range");

  const int n_nodes = bundle.grid.n_nodes();
  const int nc = bundle.n_components;
  const int nd = static_cast<int>(spec.drivers.size());
  const double h = bundle.grid.dt();

  DensityPath out;
  out.recorded = bundle.recorded;
  out.n_paths = bundle.n_paths;
  out.z.assign(static_cast<std::size_t>(bundle.n_paths) * n_nodes, 1.0);
  out.status.assign(bundle.n_paths, PathStatus::alive);

  std::vector<long> invalid_per_chunk;
  parallel_for_paths(bundle.n_paths, 0, [&](int lo, int hi) {
    std::vector<double> alpha(nd);
    for (int p = lo; p < hi; ++p) {
      const PathStatus ps = bundle.status[p];
      // The bundle row at flag_node is a copy of the last valid row, so the
      // step into it carries zero increments; the density must stop one step
      // earlier or it would drain -alpha^2 h / 2 against no noise.
      const int frozen_from =
          (ps == PathStatus::alive) ? n_nodes : std::max(0, bundle.flag_node[p] - 1);
      if (ps == PathStatus::invalid) {
        out.status[p] = PathStatus::invalid;
        continue;
      }
      double* zrow = &out.z[static_cast<std::size_t>(p) * n_nodes];
      double logz = 0.0;
      for (int k = 0; k + 1 < n_nodes; ++k) {
        if (k >= frozen_from) {  // bundle froze the path here: density freezes too
          zrow[k + 1] = zrow[k];
          continue;
        }
        const double* left = &bundle.values[(static_cast<std::size_t>(p) * n_nodes + k) * nc];
        const double* right = left + nc;
        spec.alpha(std::span<const double>(left, nc), bundle.grid.node(k),
                   std::span<double>(alpha.data(), nd));
        bool ok = true;
        double drift = 0.0, gain = 0.0;
        for (int j = 0; j < nd; ++j) {
          const double a = alpha[j];
          if (!std::isfinite(a)) {
            ok = false;
            break;
          }
          gain += a * (right[spec.drivers[j]] - left[spec.drivers[j]]);
          drift += a * a;
        }
        if (!ok) {
          out.status[p] = PathStatus::invalid;
          for (int j = k + 1; j < n_nodes; ++j) zrow[j] = zrow[k];
          break;
        }
        logz += gain - 0.5 * drift * h;
        zrow[k + 1] = std::exp(logz);
      }
    }
  });

  std::vector<double> term;
  term.reserve(bundle.n_paths);
  for (int p = 0; p < bundle.n_paths; ++p) {
    if (out.status[p] == PathStatus::invalid)
      ++out.n_invalid;
    else
      term.push_back(out.at(p, n_nodes - 1));
  }
  if (term.empty()) throw std::runtime_error("doleans: every path invalid");
  out.terminal = plain_mean(term);
  return out;
}

McEstimate covariation(int n_paths, int n_slots, const PathSeries& a, const PathSeries& b) {
  if (n_paths < 2) throw std::invalid_argument("covariation: need at least 2 paths");
  if (n_slots < 2) throw std::invalid_argument("covariation: need at least 2 nodes");
  std::vector<double> per_path(n_paths);
  parallel_for_paths(n_paths, 0, [&](int lo, int hi) {
    for (int p = lo; p < hi; ++p) {
      double acc = 0.0;
      double pa = a(p, 0), pb = b(p, 0);
      for (int s = 1; s < n_slots; ++s) {
        const double ca = a(p, s), cb = b(p, s);
        acc += (ca - pa) * (cb - pb);
        pa = ca;
        pb = cb;
      }
      per_path[p] = acc;
    }
  });
  return plain_mean(per_path);
}

PathSeries series_of(const PathBundle& bundle, int comp) {
  if (comp < 0 || comp >= bundle.n_components)
    throw std::invalid_argument("series_of: component out of range");
  return [&bundle, comp](int path, int slot) { return bundle.at(path, slot, comp); };
}

PathSeries series_of(const DensityPath& density) {
  return [&density](int path, int slot) { return density.at(path, slot); };
}

ReweightedLaw reweighted_law(const PathBundle& bundle, const DensityPath& density, int node,
                             int comp) {
  if (comp < 0 || comp >= bundle.n_components)
    throw std::invalid_argument("reweighted_law: component out of range");
  if (density.n_paths != bundle.n_paths)
    throw std::invalid_argument("reweighted_law: density/bundle path mismatch");
  const int slot = bundle.slot(node);
  if (slot < 0) throw std::invalid_argument("reweighted_law: node not recorded in bundle");
  const int dslot = [&] {
    for (std::size_t i = 0; i < density.recorded.size(); ++i)
      if (density.recorded[i] == node) return static_cast<int>(i);
    throw std::invalid_argument("reweighted_law: node not recorded in density");
  }();

  ReweightedLaw out;
  out.law.label = "reweighted";
  double wsum = 0.0;
  for (int p = 0; p < bundle.n_paths; ++p) {
    if (bundle.status[p] == PathStatus::invalid || density.status[p] == PathStatus::invalid)
      continue;
    const double w = density.at(p, dslot);
    out.law.samples.push_back(bundle.at(p, slot, comp));
    out.law.weights.push_back(w);
    wsum += w;
  }
  if (out.law.samples.empty()) throw std::runtime_error("reweighted_law: no valid paths");
  const double scale = static_cast<double>(out.law.samples.size()) / wsum;
  for (double& w : out.law.weights) w *= scale;
  out.effective_size = out.law.effective_size();
  out.degenerate = out.effective_size < 100.0;
  return out;
}

namespace {

struct SortedTriple {
  std::vector<double> x, y, w;
};

SortedTriple sort_by_x(std::span<const double> xs, std::span<const double> ys,
                       std::span<const double> ws) {
  if (xs.size() != ys.size()) throw std::invalid_argument("binning: xs/ys size mismatch");
  if (!ws.empty() && ws.size() != xs.size())
    throw std::invalid_argument("binning: weights size mismatch");
  std::vector<int> idx(xs.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return xs[a] < xs[b]; });
  SortedTriple t;
  t.x.reserve(xs.size());
  t.y.reserve(xs.size());
  t.w.reserve(xs.size());
  for (int i : idx) {
    t.x.push_back(xs[i]);
    t.y.push_back(ys[i]);
    t.w.push_back(ws.empty() ? 1.0 : ws[i]);
  }
  return t;
}

}  // namespace

BinnedFit condexp_regress(std::span<const double> xs, std::span<const double> ys,
                          std::span<const double> weights, int n_bins) {
  if (n_bins < 3) throw std::invalid_argument("condexp_regress: need at least 3 bins");
  const long n = static_cast<long>(xs.size());
  if (n / n_bins < 50) throw std::invalid_argument("condexp_regress: need >= 50 points per bin");

  const SortedTriple t = sort_by_x(xs, ys, weights);
  BinnedFit fit;
  for (int b = 0; b < n_bins; ++b) {
    const long lo = n * b / n_bins;
    const long hi = n * (b + 1) / n_bins;
    const std::span<const double> yb(t.y.data() + lo, t.y.data() + hi);
    const std::span<const double> wb(t.w.data() + lo, t.w.data() + hi);
    const McEstimate my = weighted_mean(yb, wb);
    const McEstimate mx =
        weighted_mean(std::span<const double>(t.x.data() + lo, t.x.data() + hi), wb);
    fit.center.push_back(mx.mean);
    fit.mean.push_back(my.mean);
    fit.se.push_back(my.se);
    fit.n_eff.push_back(my.n_effective);
  }
  return fit;
}

double BinnedFit::operator()(double x) const {
  const int nb = n_bins();
  if (nb == 0) throw std::logic_error("BinnedFit: empty");
  if (x <= center.front()) return mean.front();
  if (x >= center.back()) return mean.back();
  const auto it = std::upper_bound(center.begin(), center.end(), x);
  const int j = static_cast<int>(it - center.begin());
  const double t = (x - center[j - 1]) / (center[j] - center[j - 1]);
  return mean[j - 1] + t * (mean[j] - mean[j - 1]);
}

BinZScores unit_conditional_density_check(std::span<const double> cond,
                                          std::span<const double> density_values, int n_bins) {
  const BinnedFit fit = condexp_regress(cond, density_values, {}, n_bins);
  BinZScores out;
  out.center = fit.center;
  out.mean = fit.mean;
  out.se = fit.se;
  out.z.resize(fit.mean.size());
  for (std::size_t i = 0; i < fit.mean.size(); ++i)
    out.z[i] = (fit.mean[i] - 1.0) / (fit.se[i] > 0.0 ? fit.se[i] : 1e-300);
  return out;
}

BinZScores unit_conditional_density_check(const PathBundle& bundle, const DensityPath& density,
                                          std::span<const double> cond, int node, int n_bins) {
  if (static_cast<int>(cond.size()) != bundle.n_paths)
    throw std::invalid_argument("unit_conditional_density_check: conditioning size mismatch");
  const int dslot = [&] {
    for (std::size_t i = 0; i < density.recorded.size(); ++i)
      if (density.recorded[i] == node) return static_cast<int>(i);
    throw std::invalid_argument("unit_conditional_density_check: node not recorded");
  }();
  std::vector<double> c, zv;
  for (int p = 0; p < bundle.n_paths; ++p) {
    if (bundle.status[p] == PathStatus::invalid || density.status[p] == PathStatus::invalid)
      continue;
    c.push_back(cond[p]);
    zv.push_back(density.at(p, dslot));
  }
  return unit_conditional_density_check(c, zv, n_bins);
}

double BinZScores::max_abs_z() const {
  double m = 0.0;
  for (double v : z) m = std::max(m, std::fabs(v));
  return m;
}

}  // namespace slm
