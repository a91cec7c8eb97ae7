#pragma once

#include <span>

#include "slm/sde.hpp"

namespace slm {

// Price/volatility pair driven by three Brownian motions:
//   dS = S v^alpha (sigma1 dB1 + sigma2 dB2),            S_0 = s0,
//   dv = v (a1 dB1 + a2 dB2 + a3 dB3) + kappa (L - v)dt, v_0 = v0.
// The sign of a1*sigma1 + a2*sigma2 decides whether S keeps its full mean;
// drift_sign() exposes it. kappa is the mean-reversion rate and level_L its
// target (both zero by default, the headline regime).
struct StochVolParams {
  double sigma1 = 1.0;
  double sigma2 = 0.0;
  double a1 = 1.0;
  double a2 = 0.0;
  double a3 = 0.0;
  double alpha = 1.0;    // volatility exponent, > 0
  double kappa = 0.0;    // mean-reversion rate, >= 0
  double level_L = 0.0;  // mean-reversion level, >= 0
  double s0 = 1.0;       // initial price, > 0
  double v0 = 1.0;       // initial volatility, > 0

  double drift_sign() const { return a1 * sigma1 + a2 * sigma2; }
};

// Mean estimate at one horizon for the auxiliary diffusion staying finite,
// from one shared path set per step size (so curves over horizons are
// monotone by construction).
struct StepEstimate {
  int n_steps = 0;
  double value = 0.0;
};

struct ExplosionReport {
  double horizon = 0.0;
  McEstimate p_no_explosion;         // finest step size
  std::vector<StepEstimate> by_step;  // coarse-to-fine, for bias diagnosis
  long n_zero_hit = 0;               // paths that touched the 1e-10 floor
};

// One capped slice of the mass identity: E[S_T; sup v <= level] on the price
// side against s0 * P(survives with sup <= level) on the auxiliary side.
// The slice integrand is bounded by exp(c * level), so low slices agree with
// honest CLT errors at feasible sample sizes, unlike the headline means.
// assertable marks the slices low enough to z-test (within-slice moments of
// the deepest slice already exceed what 1e5 paths resolve); the deepest
// slice still anchors the tail accounting. top_share is a diagnostic: the
// fraction of slice mass carried by its top percentile of paths.
struct TruncatedCheck {
  double level = 0.0;
  McEstimate lhs;
  McEstimate rhs;
  double z = 0.0;
  double lhs_bias = 0.0, rhs_bias = 0.0;  // coarse minus fine, paired
  double top_share = 0.0;
  bool assertable = false;
};

// Two independent estimates of the same number: the price mean lhs = E[S_T]
// and the surviving-mass side rhs = s0 * P(auxiliary diffusion finite on
// [0,T]). Coarse chains are driven by the same draws as the fine chains
// (pairwise-summed increments), so bias = mean(coarse - fine) isolates the
// step-size error from the Monte Carlo noise.
//
// The headline z_score is resolution-limited: at nonnegative drift sign the
// price carries part of its mean in excursions no feasible sample reaches
// (tail index near 1), so lhs undershoots by an amount no resampling se can
// certify. tail_mass quantifies that floor from the auxiliary side: the mass
// of surviving paths whose sup exceeds the top cap, i.e. the slice the price
// sample cannot resolve. The truncated ladder carries the assertable content.
struct MassCheckReport {
  McEstimate lhs;
  McEstimate rhs;
  double z_score = 0.0;  // |lhs - rhs| / combined se
  std::vector<TruncatedCheck> truncated;
  double tail_mass = 0.0;  // s0 * P(survives, sup > top cap)
  double lhs_bias = 0.0, lhs_bias_se = 0.0;
  double rhs_bias = 0.0, rhs_bias_se = 0.0;
  bool biased = false;  // some |bias| above one se of its estimate: do not assert z
  std::vector<StepEstimate> lhs_by_step, rhs_by_step;
};

// Mean with a standard error that stays honest for heavy-tailed samples.
// Batch-means se over contiguous blocks; when the Hill index of the top
// block signals effectively unbounded variance (tail index near 1, as
// exponential-martingale prices have at nonnegative drift sign), the mass
// carried by that block is added to the se. For index-1 tails the mass per
// decade is roughly constant, so the extreme block measures the scale of
// whatever mass the sample cannot see.
McEstimate tail_aware_mean(std::span<const double> xs);

// Joint log-space Euler over the three drivers. Bundle components:
// S, v, B1, B2, B3 (driver levels recorded so downstream observers can
// integrate against them).
PathBundle simulate_sv(const StochVolParams& p, const TimeGrid& grid, int n_paths,
                       std::uint64_t seed, RecordSpec rec = {}, EngineOptions opt = {});

// Auxiliary diffusion dw = w (a1 dB1 + a2 dB2 + a3 dB3)
//                        + [kappa (L - w) + (a1 sigma1 + a2 sigma2) w^{alpha+1}]dt.
// Explosion threshold 1e8 (the superlinear drift makes post-threshold blowup
// essentially instantaneous); paths are stopped if they touch 1e-10, which
// the dynamics should never do.
PathBundle simulate_hatv(const StochVolParams& p, const TimeGrid& grid, int n_paths,
                         std::uint64_t seed, RecordSpec rec = {}, EngineOptions opt = {});

double exploded_fraction(const PathBundle& b);

// E[S_T] vs s0 * P(no explosion by T), estimated on disjoint streams with a
// coupled step-halving bias control on each side. n_steps must be even.
MassCheckReport mass_check(const StochVolParams& p, double T, long n_paths,
                           std::uint64_t seed, int n_steps = 10000,
                           EngineOptions opt = {});

// Survival curve T -> p_no_explosion(T) on one shared path set per step size;
// horizons must be positive and strictly increasing.
std::vector<ExplosionReport> explosion_curve(const StochVolParams& p,
                                             std::span<const double> horizons,
                                             long n_paths, std::uint64_t seed,
                                             int steps_per_unit = 4000,
                                             EngineOptions opt = {});

// Central-difference slopes of the survival curve (one-sided at the ends);
// a smoothness diagnostic for the curve's C^1 claim.
std::vector<double> curve_slopes(std::span<const ExplosionReport> reports);

// Observation process X = B1 - sigma1 * int_0^t v^alpha ds along each path,
// with a per-path trapezoid over the recorded nodes. The bundle must carry
// components named "v" and "B1" (as simulate_sv records). Flagged paths are
// frozen from their flag node, matching the input convention.
PathBundle hatx_path(const StochVolParams& p, const PathBundle& sv_bundle);

}  // namespace slm
