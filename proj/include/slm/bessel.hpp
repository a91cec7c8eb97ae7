#pragma once

#include <cstdint>
#include <functional>

#include "slm/bundle.hpp"
#include "slm/empirical.hpp"

namespace slm {

// Observation delay: the observer at time t sees the driving noise up to t - epsilon.
struct DelayParams {
  double epsilon = 0.5;
};

// One G-visible state: the three driving coordinates and the derived level
// m = 1/radius. States closer to the origin than radius 1e-10 are clamped
// there (the origin is polar, but floating point is not measure theory).
struct Bessel3State {
  double b1, b2, b3;
  double m;
};

Bessel3State make_bessel_state(double b1, double b2, double b3);

// Count of near-origin clamps since process start (diagnostic, monotone).
long bessel_clamp_count();

// ---- closed forms -----------------------------------------------------------

// u(x,y,t) = (2 pi t)^{-1/2} e^z K0(z), z = (x^2+y^2)/(4t): the best guess of
// the level given only the first two coordinates. Overflow-safe via scaled K0.
double proj_b1b2(double x, double y, double t);

// psi(x,y,t) = (2 pi t)^{-1/2} e^z (K0 - K1)(z) / (2t) < 0, the radial factor
// of grad u: d/dx u = x psi, d/dy u = y psi.
double psi_eval(double x, double y, double t);

// f(m) = m erf(1/(m sqrt(2 eps))): the best guess of the level a delay eps
// ahead of the last visible state. 0 < f(m) < min(m, sqrt(2/(pi eps))).
double delayed_projection(double m, DelayParams d);

// f'(m) = erf(y) - (2/sqrt(pi)) y e^{-y^2}, y = 1/(m sqrt(2 eps)); in (0,1).
double delayed_fprime(double m, DelayParams d);

// Ito coefficients of t -> f(M_t): drift mu(m) < 0 and volatility
// sigma(m) = -m^2 f'(m) < 0 against the driving Brownian motion.
struct DriftVol {
  double drift;
  double vol;
};
DriftVol projected_drift_vol(double m, DelayParams d);

// Girsanov integrands that cancel the drift of the delayed projection:
// against its own volatility (tilt_m = -mu/sigma), and for the difference
// process f(M) - W whose diffusion coefficient is sigma - 1
// (tilt_mw = -mu/(sigma-1), bounded by sqrt(2/pi) eps^{-3/2}).
double girsanov_tilt_m(double m, DelayParams d);
double girsanov_tilt_mw(double m, DelayParams d);

// ---- exact sampling ---------------------------------------------------------

// M_t = 1/|B_t| with B_t ~ N((1,0,0), t I): one exact Gaussian draw per path.
EmpiricalLaw sample_m_exact(double t, long n_paths, std::uint64_t seed,
                            std::uint64_t stream = 0);

// M_{t+eps} given the state sits at radius 1/m at time t (rotation invariance
// lets the state be placed at (1/m, 0, 0)).
EmpiricalLaw sample_m_delayed(double m, double eps, long n_paths, std::uint64_t seed,
                              std::uint64_t stream = 0);

// Joint exact draws (M_t, M_{t+eps}) along the same path.
struct PairedSamples {
  std::vector<double> first;
  std::vector<double> second;
};
PairedSamples sample_m_pair(double t, double eps, long n_paths, std::uint64_t seed,
                            std::uint64_t stream = 0);

// ---- path-level construction ------------------------------------------------

// Grid paths with exact Gaussian coordinate increments. Components
// (M, B1, B2, B3, W): M = 1/radius at each node, W accumulated from
// dW = m (b . db), whose per-step conditional law is exactly N(0, h).
PathBundle bessel_paths(const TimeGrid& grid, int n_paths, std::uint64_t seed,
                        std::uint64_t stream = 0, RecordSpec rec = {});

// Streams the same paths step by step without materializing a bundle.
// For each path, fn is called with k = 0..n_steps-1 in order; `left` and
// `right` are the states at nodes k and k+1 with layout {m, b1, b2, b3, w},
// `incr` carries the exact step quantities {d1, d2, d3, dw}.  Paths run
// concurrently, so fn must only touch per-path state.
using BesselStepFn = std::function<void(int path, int k, const double* left,
                                        const double* right, const double* incr)>;
void walk_bessel_paths(const TimeGrid& grid, int n_paths, std::uint64_t seed,
                       std::uint64_t stream, const BesselStepFn& fn, int jobs = 0);

// Mean of M at the horizon with the path stopped the first time the (b1,b2)
// disc radius squared drops to disc_level; the stopped level never exceeds
// 1/sqrt(disc_level). Streams over paths, nothing stored.
struct LocalizedMean {
  McEstimate estimate;
  double max_level = 0.0;  // max over paths of the stopped terminal level
  long n_stopped = 0;
};
LocalizedMean bessel_localized_mean(double T, int n_steps, long n_paths,
                                    std::uint64_t seed, double disc_level,
                                    std::uint64_t stream = 0);

}  // namespace slm
