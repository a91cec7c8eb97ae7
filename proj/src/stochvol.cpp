#include "slm/stochvol.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace slm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Stream ids: the two mass_check sides must see disjoint draws so they are
// independent estimates no matter how the work is scheduled.
constexpr std::uint64_t kStreamSv = 0;
constexpr std::uint64_t kStreamHatv = 1;
constexpr std::uint64_t kStreamMassLhs = 11;
constexpr std::uint64_t kStreamMassRhs = 12;
constexpr std::uint64_t kStreamCurve = 13;

constexpr double kExplodeCap = 1e8;   // original coordinates
constexpr double kZeroFloor = 1e-10;  // the dynamics should never reach this

void validate_params(const StochVolParams& p) {
  const double fields[] = {p.sigma1, p.sigma2, p.a1,      p.a2, p.a3,
                           p.alpha,  p.kappa,  p.level_L, p.s0, p.v0};
  for (double f : fields)
    if (!std::isfinite(f)) throw std::invalid_argument("StochVolParams: non-finite field");
  if (!(p.alpha > 0.0)) throw std::invalid_argument("StochVolParams: alpha must be > 0");
  if (!(p.s0 > 0.0)) throw std::invalid_argument("StochVolParams: s0 must be > 0");
  if (!(p.v0 > 0.0)) throw std::invalid_argument("StochVolParams: v0 must be > 0");
  if (p.kappa < 0.0) throw std::invalid_argument("StochVolParams: kappa must be >= 0");
  if (p.level_L < 0.0) throw std::invalid_argument("StochVolParams: level_L must be >= 0");
}

double pow_fast(double v, double alpha, bool unit_alpha) {
  return unit_alpha ? v : std::pow(v, alpha);
}

// (S, v) depends on the drivers only through W_s = (sigma.B)/|sigma| and
// W_a = (a.B)/|a|, a correlated Brownian pair. The hot kernels integrate
// that reduced system; per step it costs one normal draw when |corr| = 1,
// two otherwise.
struct ReducedCoeffs {
  double na = 0.0;    // |a|
  double ns = 0.0;    // |sigma|
  double corr = 0.0;  // corr(W_s, W_a)
  double root = 0.0;  // sqrt(1 - corr^2)
  bool one_draw = false;
};

ReducedCoeffs reduced_coeffs(const StochVolParams& p) {
  ReducedCoeffs r;
  r.na = std::hypot(p.a1, p.a2, p.a3);
  r.ns = std::hypot(p.sigma1, p.sigma2);
  r.corr = (r.na > 0.0 && r.ns > 0.0) ? p.drift_sign() / (r.na * r.ns) : 0.0;
  r.corr = std::clamp(r.corr, -1.0, 1.0);
  const double om = 1.0 - r.corr * r.corr;
  r.one_draw = om < 1e-14;
  r.root = r.one_draw ? 0.0 : std::sqrt(om);
  return r;
}

double log_drift_v(const StochVolParams& p, double v) {
  return p.kappa == 0.0 ? 0.0 : p.kappa * (p.level_L - v) / v;
}

// One path of the price side at two resolutions on shared draws: the fine
// chain steps with h, the coarse chain with 2h using the pairwise-summed
// increments. sup_* track the volatility maximum over each skeleton,
// endpoints included, for the capped-slice estimates.
struct PricePair {
  double fine = 0.0, coarse = 0.0;
  double sup_fine = 0.0, sup_coarse = 0.0;
};

PricePair run_price_pair(const StochVolParams& p, const ReducedCoeffs& rc, double T,
                         int n_steps, RawStream& rs, const Ziggurat& zig) {
  const double h = T / n_steps;
  const double sh = std::sqrt(h);
  const bool ua = p.alpha == 1.0;
  const double ls0 = std::log(p.s0), lv0 = std::log(p.v0);
  double lsf = ls0, lvf = lv0, lsc = ls0, lvc = lv0;
  double dwa_acc = 0.0, dws_acc = 0.0;
  PricePair out;
  out.sup_fine = out.sup_coarse = p.v0;
  for (int k = 0; k < n_steps; ++k) {
    const double x1 = zig.sample(rs);
    const double dwa = sh * x1;
    const double dws = rc.one_draw ? (rc.corr >= 0.0 ? dwa : -dwa)
                                   : sh * (rc.corr * x1 + rc.root * zig.sample(rs));
    const double vf = std::exp(lvf);
    out.sup_fine = std::max(out.sup_fine, vf);
    const double vfa = pow_fast(vf, p.alpha, ua);
    lsf += rc.ns * vfa * dws - 0.5 * rc.ns * rc.ns * vfa * vfa * h;
    lvf += rc.na * dwa + (log_drift_v(p, vf) - 0.5 * rc.na * rc.na) * h;
    if (lsf < -745.0) lsf = -745.0;  // exp() is zero either way; keep arithmetic finite
    dwa_acc += dwa;
    dws_acc += dws;
    if (k & 1) {
      const double vc = std::exp(lvc);
      out.sup_coarse = std::max(out.sup_coarse, vc);
      const double vca = pow_fast(vc, p.alpha, ua);
      lsc += rc.ns * vca * dws_acc - 0.5 * rc.ns * rc.ns * vca * vca * (2.0 * h);
      lvc += rc.na * dwa_acc + (log_drift_v(p, vc) - 0.5 * rc.na * rc.na) * (2.0 * h);
      if (lsc < -745.0) lsc = -745.0;
      dwa_acc = 0.0;
      dws_acc = 0.0;
    }
  }
  out.sup_fine = std::max(out.sup_fine, std::exp(lvf));
  out.sup_coarse = std::max(out.sup_coarse, std::exp(lvc));
  out.fine = std::exp(lsf);
  out.coarse = std::exp(lsc);
  return out;
}

// One path of the auxiliary diffusion at two resolutions on shared draws.
// Returns first-crossing times of the 1e8 cap (infinity if none); a crossed
// chain stops updating but draws continue until both chains are resolved.
// sup_* track the maximum over each skeleton while the chain is uncrossed
// (a crossed path belongs to no capped slice, so its sup is never read).
struct HatTimes {
  double fine = kInf;
  double coarse = kInf;
  double sup_fine = 0.0;
  double sup_coarse = 0.0;
  bool zero_hit = false;
};

HatTimes run_hat_pair(const StochVolParams& p, const ReducedCoeffs& rc, double T,
                      int n_steps, RawStream& rs, const Ziggurat& zig) {
  const double h = T / n_steps;
  const double sh = std::sqrt(h);
  const bool ua = p.alpha == 1.0;
  const double lcap = std::log(kExplodeCap);
  const double lfloor = std::log(kZeroFloor);
  const double ds = p.drift_sign();
  double lwf = std::log(p.v0), lwc = lwf;
  double dwa_acc = 0.0;
  HatTimes out;
  out.sup_fine = out.sup_coarse = p.v0;
  for (int k = 0; k < n_steps; ++k) {
    const double dwa = sh * zig.sample(rs);
    dwa_acc += dwa;
    if (out.fine == kInf) {
      const double w = std::exp(lwf);
      out.sup_fine = std::max(out.sup_fine, w);
      lwf += rc.na * dwa +
             (ds * pow_fast(w, p.alpha, ua) + log_drift_v(p, w) - 0.5 * rc.na * rc.na) * h;
      if (lwf > lcap) out.fine = (k + 1) * h;
      if (lwf < lfloor) {
        out.zero_hit = true;
        lwf = lfloor;  // freeze at the floor; counted, never expected
      }
    }
    if (k & 1) {
      if (out.coarse == kInf) {
        const double w = std::exp(lwc);
        out.sup_coarse = std::max(out.sup_coarse, w);
        lwc += rc.na * dwa_acc + (ds * pow_fast(w, p.alpha, ua) + log_drift_v(p, w) -
                                  0.5 * rc.na * rc.na) *
                                     (2.0 * h);
        if (lwc > lcap) out.coarse = (k + 1) * h;
        if (lwc < lfloor) {
          out.zero_hit = true;
          lwc = lfloor;
        }
      }
      dwa_acc = 0.0;
      if (out.fine < kInf && out.coarse < kInf) break;
    }
  }
  if (out.fine == kInf) out.sup_fine = std::max(out.sup_fine, std::exp(lwf));
  if (out.coarse == kInf) out.sup_coarse = std::max(out.sup_coarse, std::exp(lwc));
  return out;
}

McEstimate scaled(McEstimate e, double c) {
  e.mean *= c;
  e.se *= c;
  return e;
}

// Batch-means standard error over contiguous path blocks. Exponential-
// martingale prices have effectively unbounded variance at nonnegative
// drift sign, so the per-sample iid se understates the spread of the mean;
// the spread of block means does not. Deterministic in the path order, so
// results stay independent of job count.
McEstimate batch_mean_se(std::span<const double> xs, int n_batches = 20) {
  McEstimate e;
  const long n = static_cast<long>(xs.size());
  if (n == 0) throw std::invalid_argument("batch_mean_se: empty sample");
  double total = 0.0;
  for (double x : xs) total += x;
  e.mean = total / n;
  e.n_used = n;
  const int nb = static_cast<int>(std::min<long>(n_batches, n));
  e.n_effective = nb;
  if (nb < 2) return e;  // se stays 0: no spread information
  double ss = 0.0;
  long lo = 0;
  for (int b = 0; b < nb; ++b) {
    const long hi = n * (b + 1) / nb;
    double s = 0.0;
    for (long i = lo; i < hi; ++i) s += xs[i];
    const double d = s / (hi - lo) - e.mean;
    ss += d * d;
    lo = hi;
  }
  e.se = std::sqrt(ss / (nb - 1)) / std::sqrt(static_cast<double>(nb));
  return e;
}

// Fraction of the total mass carried by the top percentile (at least 20
// paths). A mean whose top block carries much of the mass is set by a
// handful of paths and its se underestimates; callers gate on this.
double top_block_share(std::span<const double> xs) {
  const long n = static_cast<long>(xs.size());
  const long k = std::max<long>(20, n / 100);
  if (k >= n) return 1.0;
  double total = 0.0;
  for (double x : xs) total += x;
  if (!(total > 0.0)) return 1.0;
  std::vector<double> top(xs.begin(), xs.end());
  std::nth_element(top.begin(), top.begin() + k, top.end(), std::greater<double>());
  double mass = 0.0;
  for (long i = 0; i < k; ++i) mass += top[i];
  return mass / total;
}

}  // namespace

McEstimate tail_aware_mean(std::span<const double> xs) {
  McEstimate e = batch_mean_se(xs);
  const long n = static_cast<long>(xs.size());
  const long k = std::max<long>(20, n / 100);
  if (3 * k > n) return e;  // too small to judge the tail shape

  std::vector<double> top(xs.begin(), xs.end());
  std::nth_element(top.begin(), top.begin() + k, top.end(), std::greater<double>());
  const double xk = top[k];
  if (!(xk > 0.0)) return e;
  double hill = 0.0, mass = 0.0;
  for (long i = 0; i < k; ++i) {
    hill += std::log(top[i] / xk);
    mass += top[i];
  }
  hill /= k;
  if (hill >= 0.7) e.se = std::hypot(e.se, mass / n);
  return e;
}

PathBundle simulate_sv(const StochVolParams& p, const TimeGrid& grid, int n_paths,
                       std::uint64_t seed, RecordSpec rec, EngineOptions opt) {
  validate_params(p);
  SdeSystem sys;
  sys.components = {{"S", true}, {"v", true}};
  sys.noise_dim = 3;
  sys.x0 = {p.s0, p.v0};
  sys.record_noise = true;
  sys.stream = kStreamSv;
  sys.drift = [p](double, const double* x, double* out) {
    out[0] = 0.0;
    out[1] = p.kappa * (p.level_L - x[1]);
  };
  const bool ua = p.alpha == 1.0;
  sys.diffusion = [p, ua](double, const double* x, double* out) {
    const double va = pow_fast(x[1], p.alpha, ua);
    out[0] = p.sigma1 * va * x[0];
    out[1] = p.sigma2 * va * x[0];
    out[2] = 0.0;
    out[3] = p.a1 * x[1];
    out[4] = p.a2 * x[1];
    out[5] = p.a3 * x[1];
  };
  PathBundle b = integrate_sde(sys, grid, n_paths, seed, std::move(rec), opt);
  b.names = {"S", "v", "B1", "B2", "B3"};
  return b;
}

PathBundle simulate_hatv(const StochVolParams& p, const TimeGrid& grid, int n_paths,
                         std::uint64_t seed, RecordSpec rec, EngineOptions opt) {
  validate_params(p);
  SdeSystem sys;
  sys.components = {{"vhat", true, kZeroFloor, kInf}};
  sys.noise_dim = 3;
  sys.x0 = {p.v0};
  sys.stream = kStreamHatv;
  const double ds = p.drift_sign();
  const bool ua = p.alpha == 1.0;
  sys.drift = [p, ds, ua](double, const double* x, double* out) {
    out[0] = p.kappa * (p.level_L - x[0]) + ds * x[0] * pow_fast(x[0], p.alpha, ua);
  };
  sys.diffusion = [p](double, const double* x, double* out) {
    out[0] = p.a1 * x[0];
    out[1] = p.a2 * x[0];
    out[2] = p.a3 * x[0];
  };
  sys.explosion_threshold = kExplodeCap;
  return integrate_sde(sys, grid, n_paths, seed, std::move(rec), opt);
}

double exploded_fraction(const PathBundle& b) {
  if (b.n_paths <= 0) return 0.0;
  long n = 0;
  for (auto st : b.status) n += st == PathStatus::exploded;
  return static_cast<double>(n) / b.n_paths;
}

MassCheckReport mass_check(const StochVolParams& p, double T, long n_paths,
                           std::uint64_t seed, int n_steps, EngineOptions opt) {
  validate_params(p);
  if (T < 0.0 || !std::isfinite(T)) throw std::invalid_argument("mass_check: bad horizon");
  if (n_paths <= 0) throw std::invalid_argument("mass_check: n_paths must be > 0");

  MassCheckReport rep;
  if (T == 0.0) {
    rep.lhs.mean = rep.rhs.mean = p.s0;
    rep.lhs.n_used = rep.rhs.n_used = n_paths;
    return rep;
  }
  if (n_steps < 2 || n_steps % 2 != 0)
    throw std::invalid_argument("mass_check: n_steps must be even and >= 2");

  const ReducedCoeffs rc = reduced_coeffs(p);
  const int n = static_cast<int>(n_paths);
  const Ziggurat& zig = Ziggurat::instance();

  std::vector<double> sf(n), sc(n), vsup_f(n), vsup_c(n);
  parallel_for_paths(n, opt.jobs, [&](int lo, int hi) {
    for (int path = lo; path < hi; ++path) {
      RawStream rs(seed, kStreamMassLhs, static_cast<std::uint64_t>(path));
      const PricePair pp = run_price_pair(p, rc, T, n_steps, rs, zig);
      sf[path] = pp.fine;
      sc[path] = pp.coarse;
      vsup_f[path] = pp.sup_fine;
      vsup_c[path] = pp.sup_coarse;
    }
  });
  std::vector<double> work(n);
  for (int i = 0; i < n; ++i) work[i] = sc[i] - sf[i];
  rep.lhs = tail_aware_mean(sf);
  const McEstimate lb = batch_mean_se(work);
  rep.lhs_bias = lb.mean;
  rep.lhs_bias_se = lb.se;
  rep.lhs_by_step = {{n_steps / 2, rep.lhs.mean + rep.lhs_bias}, {n_steps, rep.lhs.mean}};

  // A crossing on the final node counts as exploded on [0,T]; the nudge keeps
  // that stable under the rounding of grid times.
  const double cut = T * (1.0 + 1e-12);
  std::vector<double> hs_f(n), hs_c(n), hsup_f(n), hsup_c(n);
  parallel_for_paths(n, opt.jobs, [&](int lo, int hi) {
    for (int path = lo; path < hi; ++path) {
      RawStream rs(seed, kStreamMassRhs, static_cast<std::uint64_t>(path));
      const HatTimes ht = run_hat_pair(p, rc, T, n_steps, rs, zig);
      hs_f[path] = ht.fine > cut ? 1.0 : 0.0;
      hs_c[path] = ht.coarse > cut ? 1.0 : 0.0;
      hsup_f[path] = ht.sup_fine;
      hsup_c[path] = ht.sup_coarse;
    }
  });
  for (int i = 0; i < n; ++i) work[i] = hs_c[i] - hs_f[i];
  rep.rhs = scaled(batch_mean_se(hs_f), p.s0);
  const McEstimate rb = batch_mean_se(work);
  rep.rhs_bias = rb.mean * p.s0;
  rep.rhs_bias_se = rb.se * p.s0;
  rep.rhs_by_step = {{n_steps / 2, rep.rhs.mean + rep.rhs_bias}, {n_steps, rep.rhs.mean}};

  const double gap = std::fabs(rep.lhs.mean - rep.rhs.mean);
  const double se = std::hypot(rep.lhs.se, rep.rhs.se);
  rep.z_score = gap == 0.0 ? 0.0 : (se > 0.0 ? gap / se : kInf);
  // Step halving must show bias below one se of the estimate itself,
  // otherwise the z-score compares numbers dominated by discretization error.
  rep.biased = std::fabs(rep.lhs_bias) > rep.lhs.se + 1e-12 ||
               std::fabs(rep.rhs_bias) > rep.rhs.se + 1e-12;

  // Capped slices: price paths whose volatility never left [0, K] against
  // auxiliary paths that survived without leaving [0, K]. The slice integrand
  // is bounded, so low slices compare with honest CLT errors; what the
  // ladder cannot see is exactly rhs - rhs_top = tail_mass. The 8x slice is
  // kept for that accounting but not asserted: across drift signs and seeds
  // its within-slice tail already overwhelms 1e5-path resolution, while the
  // 3x and 5x slices hold z < 3 uniformly.
  const double base = std::max(p.v0, p.level_L);
  std::vector<double> capped(n);
  for (double mult : {3.0, 5.0, 8.0}) {
    TruncatedCheck tc;
    tc.level = mult * base;
    tc.assertable = mult <= 5.0;
    for (int i = 0; i < n; ++i) capped[i] = vsup_f[i] <= tc.level ? sf[i] : 0.0;
    tc.lhs = batch_mean_se(capped);
    tc.top_share = top_block_share(capped);
    for (int i = 0; i < n; ++i)
      work[i] = (vsup_c[i] <= tc.level ? sc[i] : 0.0) - capped[i];
    tc.lhs_bias = batch_mean_se(work).mean;
    for (int i = 0; i < n; ++i)
      capped[i] = hs_f[i] != 0.0 && hsup_f[i] <= tc.level ? 1.0 : 0.0;
    tc.rhs = scaled(batch_mean_se(capped), p.s0);
    for (int i = 0; i < n; ++i)
      work[i] = (hs_c[i] != 0.0 && hsup_c[i] <= tc.level ? 1.0 : 0.0) - capped[i];
    tc.rhs_bias = batch_mean_se(work).mean * p.s0;
    const double tgap = std::fabs(tc.lhs.mean - tc.rhs.mean);
    const double tse = std::hypot(tc.lhs.se, tc.rhs.se);
    tc.z = tgap == 0.0 ? 0.0 : (tse > 0.0 ? tgap / tse : kInf);
    rep.truncated.push_back(tc);
  }
  rep.tail_mass = rep.rhs.mean - rep.truncated.back().rhs.mean;
  return rep;
}

std::vector<ExplosionReport> explosion_curve(const StochVolParams& p,
                                             std::span<const double> horizons,
                                             long n_paths, std::uint64_t seed,
                                             int steps_per_unit, EngineOptions opt) {
  validate_params(p);
  if (horizons.empty()) throw std::invalid_argument("explosion_curve: no horizons");
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (!(horizons[i] > 0.0) || !std::isfinite(horizons[i]))
      throw std::invalid_argument("explosion_curve: horizons must be positive");
    if (i > 0 && horizons[i] <= horizons[i - 1])
      throw std::invalid_argument("explosion_curve: horizons must be strictly increasing");
  }
  if (steps_per_unit < 2) throw std::invalid_argument("explosion_curve: steps_per_unit < 2");
  if (n_paths <= 0) throw std::invalid_argument("explosion_curve: n_paths must be > 0");

  const double T = horizons.back();
  int n_steps = static_cast<int>(std::ceil(steps_per_unit * T));
  n_steps += n_steps % 2;

  const ReducedCoeffs rc = reduced_coeffs(p);
  const int n = static_cast<int>(n_paths);
  const Ziggurat& zig = Ziggurat::instance();

  std::vector<double> tf(n), tc(n);
  std::vector<unsigned char> zh(n, 0);
  parallel_for_paths(n, opt.jobs, [&](int lo, int hi) {
    for (int path = lo; path < hi; ++path) {
      RawStream rs(seed, kStreamCurve, static_cast<std::uint64_t>(path));
      const HatTimes ht = run_hat_pair(p, rc, T, n_steps, rs, zig);
      tf[path] = ht.fine;
      tc[path] = ht.coarse;
      zh[path] = ht.zero_hit ? 1 : 0;
    }
  });
  long zero_hits = 0;
  for (auto z : zh) zero_hits += z;

  std::vector<ExplosionReport> out;
  out.reserve(horizons.size());
  std::vector<double> ind(n);
  for (double hz : horizons) {
    ExplosionReport r;
    r.horizon = hz;
    // Grid times are multiples of T/n_steps; nudge the cut so a horizon that
    // falls on a crossing node counts the path as exploded at that horizon.
    const double cut = hz * (1.0 + 1e-12);
    for (int i = 0; i < n; ++i) ind[i] = tf[i] > cut ? 1.0 : 0.0;
    r.p_no_explosion = plain_mean(ind);
    double pc = 0.0;
    for (int i = 0; i < n; ++i) pc += tc[i] > cut ? 1.0 : 0.0;
    r.by_step = {{n_steps / 2, pc / n}, {n_steps, r.p_no_explosion.mean}};
    r.n_zero_hit = zero_hits;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<double> curve_slopes(std::span<const ExplosionReport> reports) {
  const std::size_t n = reports.size();
  std::vector<double> s(n, 0.0);
  if (n < 2) return s;
  auto slope = [&](std::size_t i, std::size_t j) {
    return (reports[j].p_no_explosion.mean - reports[i].p_no_explosion.mean) /
           (reports[j].horizon - reports[i].horizon);
  };
  s[0] = slope(0, 1);
  for (std::size_t i = 1; i + 1 < n; ++i) s[i] = slope(i - 1, i + 1);
  s[n - 1] = slope(n - 2, n - 1);
  return s;
}

PathBundle hatx_path(const StochVolParams& p, const PathBundle& sv_bundle) {
  validate_params(p);
  int iv = -1, ib = -1;
  for (int i = 0; i < sv_bundle.n_components; ++i) {
    if (sv_bundle.names[i] == "v") iv = i;
    if (sv_bundle.names[i] == "B1") ib = i;
  }
  if (iv < 0 || ib < 0)
    throw std::invalid_argument("hatx_path: bundle must carry components v and B1");
  if (sv_bundle.recorded.empty()) throw std::invalid_argument("hatx_path: empty recording");

  const bool ua = p.alpha == 1.0;
  const int ns = static_cast<int>(sv_bundle.recorded.size());

  PathBundle out;
  out.grid = sv_bundle.grid;
  out.recorded = sv_bundle.recorded;
  out.n_paths = sv_bundle.n_paths;
  out.n_components = 1;
  out.names = {"Xhat"};
  out.values.resize(static_cast<std::size_t>(out.n_paths) * ns);
  out.status = sv_bundle.status;
  out.flag_node = sv_bundle.flag_node;
  out.weights = sv_bundle.weights;
  out.seed = sv_bundle.seed;
  out.stream = sv_bundle.stream;

  for (int path = 0; path < out.n_paths; ++path) {
    double* dst = &out.values[static_cast<std::size_t>(path) * ns];
    const int flag = sv_bundle.flag_node[path];
    double integral = 0.0;
    double prev_t = sv_bundle.grid.node(sv_bundle.recorded[0]);
    double prev_f = pow_fast(sv_bundle.at(path, 0, iv), p.alpha, ua);
    dst[0] = sv_bundle.at(path, 0, ib) - p.sigma1 * integral;
    for (int s = 1; s < ns; ++s) {
      const int node = sv_bundle.recorded[s];
      if (flag >= 0 && node >= flag) {
        dst[s] = dst[s - 1];  // frozen path: the observation freezes too
        continue;
      }
      const double t = sv_bundle.grid.node(node);
      const double f = pow_fast(sv_bundle.at(path, s, iv), p.alpha, ua);
      integral += 0.5 * (prev_f + f) * (t - prev_t);
      dst[s] = sv_bundle.at(path, s, ib) - p.sigma1 * integral;
      prev_t = t;
      prev_f = f;
    }
  }
  return out;
}

}  // namespace slm
