#pragma once

#include <functional>
#include <limits>

#include "slm/bundle.hpp"
#include "slm/rng.hpp"

namespace slm {

struct ComponentSpec {
  std::string name;
  bool positive = false;  // integrate in log space; stays > 0 unconditionally
  double lo = -std::numeric_limits<double>::infinity();  // open domain; exit => stopped
  double hi = std::numeric_limits<double>::infinity();
};

// Ito system dX = mu(t,X)dt + sigma(t,X)dB with drift/diffusion given in the
// original coordinates. Components flagged positive are stepped in log space:
// dlogX_i = (mu_i/X_i - |sigma_i.|^2/(2 X_i^2))dt + (sigma_i./X_i)dB.
struct SdeSystem {
  std::vector<ComponentSpec> components;
  int noise_dim = 0;
  std::vector<double> x0;
  // drift: out has size dim. diffusion: out is row-major dim x noise_dim.
  std::function<void(double t, const double* x, double* out)> drift;
  std::function<void(double t, const double* x, double* out)> diffusion;
  double explosion_threshold = 1e12;
  bool record_noise = false;  // append driving Brownian levels to recorded state
  std::uint64_t stream = 0;

  int dim() const { return static_cast<int>(components.size()); }
};

struct EngineOptions {
  int jobs = 0;  // 0 => hardware_concurrency
  double max_invalid_fraction = 0.01;
};

// Euler-Maruyama over the grid. Per-path counter-based streams make path i
// bit-identical for a given (seed, stream) regardless of jobs or batching.
PathBundle integrate_sde(const SdeSystem& sys, const TimeGrid& grid, int n_paths,
                         std::uint64_t seed, RecordSpec rec = {},
                         EngineOptions opt = {});

// Brownian motion with optional start point (defaults to the origin).
PathBundle simulate_brownian(int dim, const TimeGrid& grid, int n_paths,
                             std::uint64_t seed, std::vector<double> start = {},
                             RecordSpec rec = {}, EngineOptions opt = {});

// One fully materialized trajectory, visited and discarded: heavy experiments
// stream through this instead of holding every path in memory.
struct PathTrace {
  const TimeGrid* grid;
  const double* states;  // n_nodes x dim, row-major, frozen after flag node
  int dim;
  PathStatus status;
  int flag_node;

  double at(int node, int comp) const { return states[static_cast<std::size_t>(node) * dim + comp]; }
};

void walk_sde(const SdeSystem& sys, const TimeGrid& grid, int n_paths,
              std::uint64_t seed,
              const std::function<void(int path, const PathTrace&)>& visit,
              EngineOptions opt = {});

// Deterministic partition of [0, n) into roughly equal blocks, one task per
// block. Results written by path index stay bit-identical across job counts.
void parallel_for_paths(int n, int jobs, const std::function<void(int lo, int hi)>& body);

}  // namespace slm
