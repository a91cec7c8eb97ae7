#pragma once

#include <stdexcept>

namespace slm {

// Uniform time grid on [t0, t1] with n_steps steps (n_steps + 1 nodes).
struct TimeGrid {
  double t0 = 0.0;
  double t1 = 1.0;
  int n_steps = 1;

  double dt() const { return (t1 - t0) / n_steps; }
  int n_nodes() const { return n_steps + 1; }
  double node(int k) const { return t0 + (t1 - t0) * k / n_steps; }
};

inline TimeGrid build_grid(double t0, double t1, int n_steps) {
  if (!(t1 > t0)) throw std::invalid_argument("build_grid: need t1 > t0");
  if (n_steps < 1) throw std::invalid_argument("build_grid: need n_steps >= 1");
  return TimeGrid{t0, t1, n_steps};
}

}  // namespace slm
