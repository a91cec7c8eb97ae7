#include "slm/sde.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <thread>

namespace slm {

namespace {

std::vector<int> resolve_nodes(const RecordSpec& rec, int n_nodes) {
  std::vector<int> nodes = rec.nodes;
  if (nodes.empty()) {
    nodes.resize(n_nodes);
    for (int i = 0; i < n_nodes; ++i) nodes[i] = i;
    return nodes;
  }
  for (int n : nodes)
    if (n < 0 || n >= n_nodes) throw std::invalid_argument("RecordSpec: node out of range");
  for (std::size_t i = 1; i < nodes.size(); ++i)
    if (nodes[i] <= nodes[i - 1]) throw std::invalid_argument("RecordSpec: nodes must be strictly increasing");
  return nodes;
}

struct PathOutcome {
  PathStatus status = PathStatus::alive;
  int flag_node = -1;
};

// Integrates one path into traj (n_nodes x total_comp). Rows after a flag
// node repeat the last valid row. Gaussian draws are consumed in a fixed
// order (per step, per noise dim), so the trajectory depends only on
// (seed, stream, path index).
PathOutcome run_one_path(const SdeSystem& sys, const TimeGrid& grid, GaussStream& gs,
                         double* traj, int total_comp, double* x, double* logx,
                         double* mu, double* sig, double* xi) {
  const int dim = sys.dim();
  const int nd = sys.noise_dim;
  const int n_nodes = grid.n_nodes();
  const double h = grid.dt();
  const double sqh = std::sqrt(h);
  const double log_floor = -700.0;  // below this exp() underflows to 0
  const double log_cap = std::log(sys.explosion_threshold);

  for (int i = 0; i < dim; ++i) {
    x[i] = sys.x0[i];
    if (sys.components[i].positive) logx[i] = std::log(x[i]);  // x0 > 0 checked upstream
  }
  for (int i = 0; i < dim; ++i) traj[i] = x[i];
  for (int j = 0; j < nd && sys.record_noise; ++j) traj[dim + j] = 0.0;

  PathOutcome out;
  int k = 0;
  for (; k < n_nodes - 1; ++k) {
    const double t = grid.node(k);
    sys.drift(t, x, mu);
    sys.diffusion(t, x, sig);
    for (int j = 0; j < nd; ++j) xi[j] = gs.next();

    bool bad = false, boom = false, exit_domain = false;
    for (int i = 0; i < dim; ++i) {
      const double* srow = sig + static_cast<std::size_t>(i) * nd;
      double noise = 0.0;
      for (int j = 0; j < nd; ++j) noise += srow[j] * xi[j];
      const ComponentSpec& cs = sys.components[i];
      if (cs.positive) {
        double s2 = 0.0;
        for (int j = 0; j < nd; ++j) s2 += srow[j] * srow[j];
        const double inv = 1.0 / x[i];
        logx[i] += (mu[i] * inv - 0.5 * s2 * inv * inv) * h + noise * inv * sqh;
        if (std::isnan(logx[i])) { bad = true; break; }
        if (logx[i] < log_floor) { exit_domain = true; break; }
        if (logx[i] > log_cap) { boom = true; break; }  // before exp() can overflow
        const double xn = std::exp(logx[i]);
        x[i] = xn;
        if (!(xn > cs.lo && xn < cs.hi)) exit_domain = true;
      } else {
        const double xn = x[i] + mu[i] * h + noise * sqh;
        if (!std::isfinite(xn)) { bad = true; break; }
        x[i] = xn;
        if (std::fabs(xn) > sys.explosion_threshold) boom = true;
        if (!(xn > cs.lo && xn < cs.hi)) exit_domain = true;
      }
    }

    double* row = traj + static_cast<std::size_t>(k + 1) * total_comp;
    if (bad || boom || exit_domain) {
      out.status = bad ? PathStatus::invalid : (boom ? PathStatus::exploded : PathStatus::stopped);
      out.flag_node = k + 1;
      break;
    }
    for (int i = 0; i < dim; ++i) row[i] = x[i];
    if (sys.record_noise) {
      const double* prev = traj + static_cast<std::size_t>(k) * total_comp;
      for (int j = 0; j < nd; ++j) row[dim + j] = prev[dim + j] + sqh * xi[j];
    }
  }

  if (out.flag_node >= 0) {
    const double* last = traj + static_cast<std::size_t>(out.flag_node - 1) * total_comp;
    for (int n = out.flag_node; n < n_nodes; ++n)
      std::memcpy(traj + static_cast<std::size_t>(n) * total_comp, last,
                  sizeof(double) * total_comp);
  }
  return out;
}

void check_system(const SdeSystem& sys) {
  if (sys.dim() <= 0) throw std::invalid_argument("SdeSystem: no components");
  if (sys.noise_dim < 0) throw std::invalid_argument("SdeSystem: negative noise_dim");
  if (static_cast<int>(sys.x0.size()) != sys.dim())
    throw std::invalid_argument("SdeSystem: x0 size mismatch");
  if (!sys.drift || !sys.diffusion)
    throw std::invalid_argument("SdeSystem: drift/diffusion not set");
  if (!(sys.explosion_threshold > 0))
    throw std::invalid_argument("SdeSystem: explosion_threshold must be > 0");
  for (int i = 0; i < sys.dim(); ++i)
    if (sys.components[i].positive && !(sys.x0[i] > 0.0))
      throw std::invalid_argument("SdeSystem: positive component must start > 0");
}

}  // namespace

void parallel_for_paths(int n, int jobs, const std::function<void(int, int)>& body) {
  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (jobs < 1) jobs = 1;
  if (jobs == 1 || n <= 1) {
    body(0, n);
    return;
  }
  if (jobs > n) jobs = n;
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  const int base = n / jobs, extra = n % jobs;
  int lo = 0;
  for (int w = 0; w < jobs; ++w) {
    const int hi = lo + base + (w < extra ? 1 : 0);
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
    lo = hi;
  }
  for (auto& th : pool) th.join();
}

PathBundle integrate_sde(const SdeSystem& sys, const TimeGrid& grid, int n_paths,
                         std::uint64_t seed, RecordSpec rec, EngineOptions opt) {
  check_system(sys);
  if (n_paths <= 0) throw std::invalid_argument("integrate_sde: n_paths must be > 0");

  const int dim = sys.dim();
  const int nd = sys.noise_dim;
  const int total_comp = dim + (sys.record_noise ? nd : 0);
  const int n_nodes = grid.n_nodes();

  PathBundle b;
  b.grid = grid;
  b.recorded = resolve_nodes(rec, n_nodes);
  b.n_paths = n_paths;
  b.n_components = total_comp;
  for (const auto& c : sys.components) b.names.push_back(c.name);
  for (int j = 0; j < nd && sys.record_noise; ++j) b.names.push_back("W" + std::to_string(j));
  b.values.resize(static_cast<std::size_t>(n_paths) * b.recorded.size() * total_comp);
  b.status.assign(n_paths, PathStatus::alive);
  b.flag_node.assign(n_paths, -1);
  b.weights.assign(n_paths, 1.0);
  b.seed = seed;
  b.stream = sys.stream;

  const auto& slots = b.recorded;
  parallel_for_paths(n_paths, opt.jobs, [&](int lo, int hi) {
    std::vector<double> traj(static_cast<std::size_t>(n_nodes) * total_comp);
    std::vector<double> x(dim), logx(dim), mu(dim), sig(static_cast<std::size_t>(dim) * nd),
        xi(nd);
    for (int p = lo; p < hi; ++p) {
      GaussStream gs(seed, sys.stream, static_cast<std::uint64_t>(p));
      const PathOutcome oc = run_one_path(sys, grid, gs, traj.data(), total_comp, x.data(),
                                          logx.data(), mu.data(), sig.data(), xi.data());
      b.status[p] = oc.status;
      b.flag_node[p] = oc.flag_node;
      double* dst = &b.values[static_cast<std::size_t>(p) * slots.size() * total_comp];
      for (std::size_t s = 0; s < slots.size(); ++s)
        std::memcpy(dst + s * total_comp,
                    traj.data() + static_cast<std::size_t>(slots[s]) * total_comp,
                    sizeof(double) * total_comp);
    }
  });

  long n_invalid = 0;
  for (auto st : b.status) n_invalid += st == PathStatus::invalid;
  if (n_invalid > opt.max_invalid_fraction * n_paths)
    throw std::runtime_error("integrate_sde: invalid-path fraction exceeds limit");
  return b;
}

void walk_sde(const SdeSystem& sys, const TimeGrid& grid, int n_paths, std::uint64_t seed,
              const std::function<void(int, const PathTrace&)>& visit, EngineOptions opt) {
  check_system(sys);
  const int dim = sys.dim();
  const int nd = sys.noise_dim;
  const int total_comp = dim + (sys.record_noise ? nd : 0);
  const int n_nodes = grid.n_nodes();

  parallel_for_paths(n_paths, opt.jobs, [&](int lo, int hi) {
    std::vector<double> traj(static_cast<std::size_t>(n_nodes) * total_comp);
    std::vector<double> x(dim), logx(dim), mu(dim), sig(static_cast<std::size_t>(dim) * nd),
        xi(nd);
    for (int p = lo; p < hi; ++p) {
      GaussStream gs(seed, sys.stream, static_cast<std::uint64_t>(p));
      const PathOutcome oc = run_one_path(sys, grid, gs, traj.data(), total_comp, x.data(),
                                          logx.data(), mu.data(), sig.data(), xi.data());
      PathTrace tr{&grid, traj.data(), total_comp, oc.status, oc.flag_node};
      visit(p, tr);
    }
  });
}

PathBundle simulate_brownian(int dim, const TimeGrid& grid, int n_paths, std::uint64_t seed,
                             std::vector<double> start, RecordSpec rec, EngineOptions opt) {
  if (dim <= 0) throw std::invalid_argument("simulate_brownian: dim must be > 0");
  if (start.empty()) start.assign(dim, 0.0);
  if (static_cast<int>(start.size()) != dim)
    throw std::invalid_argument("simulate_brownian: start size mismatch");

  SdeSystem sys;
  sys.components.resize(dim);
  for (int i = 0; i < dim; ++i) sys.components[i].name = "B" + std::to_string(i + 1);
  sys.noise_dim = dim;
  sys.x0 = std::move(start);
  const int d = dim;
  sys.drift = [d](double, const double*, double* out) {
    for (int i = 0; i < d; ++i) out[i] = 0.0;
  };
  sys.diffusion = [d](double, const double*, double* out) {
    for (int i = 0; i < d * d; ++i) out[i] = 0.0;
    for (int i = 0; i < d; ++i) out[i * d + i] = 1.0;
  };
  sys.explosion_threshold = 1e300;  // Brownian motion is never flagged
  return integrate_sde(sys, grid, n_paths, seed, std::move(rec), opt);
}

McEstimate weighted_mean(std::span<const double> xs, std::span<const double> ws) {
  McEstimate e;
  double sw = 0.0, swx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sw += ws[i];
    swx += ws[i] * xs[i];
  }
  if (sw <= 0.0) throw std::invalid_argument("weighted_mean: nonpositive total weight");
  e.mean = swx / sw;
  double sw2 = 0.0, sw2d2 = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = xs[i] - e.mean;
    sw2 += ws[i] * ws[i];
    sw2d2 += ws[i] * ws[i] * d * d;
  }
  e.se = std::sqrt(sw2d2) / sw;
  e.n_effective = sw * sw / sw2;
  e.n_used = static_cast<long>(xs.size());
  return e;
}

McEstimate plain_mean(std::span<const double> xs) {
  std::vector<double> w(xs.size(), 1.0);
  return weighted_mean(xs, w);
}

McEstimate mc_mean(const PathBundle& b, int grid_node, int component, ExplodedPolicy policy) {
  const int s = b.slot(grid_node);
  if (s < 0) throw std::invalid_argument("mc_mean: node not recorded");
  if (component < 0 || component >= b.n_components)
    throw std::invalid_argument("mc_mean: component out of range");

  McEstimate e;
  double sw = 0.0, swx = 0.0;
  long used = 0, invalid = 0;
  for (int p = 0; p < b.n_paths; ++p) {
    if (b.status[p] == PathStatus::invalid) { ++invalid; continue; }
    double v = b.at(p, s, component);
    if (policy == ExplodedPolicy::zero && b.status[p] == PathStatus::exploded &&
        b.flag_node[p] <= grid_node)
      v = 0.0;
    sw += b.weights[p];
    swx += b.weights[p] * v;
    ++used;
  }
  if (used == 0 || sw <= 0.0) throw std::runtime_error("mc_mean: no usable paths");
  e.mean = swx / sw;
  double sw2 = 0.0, sw2d2 = 0.0;
  for (int p = 0; p < b.n_paths; ++p) {
    if (b.status[p] == PathStatus::invalid) continue;
    double v = b.at(p, s, component);
    if (policy == ExplodedPolicy::zero && b.status[p] == PathStatus::exploded &&
        b.flag_node[p] <= grid_node)
      v = 0.0;
    const double d = v - e.mean;
    const double w = b.weights[p];
    sw2 += w * w;
    sw2d2 += w * w * d * d;
  }
  e.se = std::sqrt(sw2d2) / sw;
  e.n_effective = sw * sw / sw2;
  e.n_used = used;
  e.n_invalid = invalid;
  return e;
}

}  // namespace slm
