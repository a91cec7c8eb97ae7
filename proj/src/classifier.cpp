#include "slm/classifier.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace slm {

namespace {

double sq(double v) { return v * v; }

void validate_spec(const DiffusionSpec& spec) {
  if (!(spec.l < spec.r)) throw std::invalid_argument("DiffusionSpec: need l < r");
  if (!(spec.c > spec.l && spec.c < spec.r))
    throw std::invalid_argument("DiffusionSpec: reference point must be interior");
  if (!(spec.x0 > spec.l && spec.x0 < spec.r))
    throw std::invalid_argument("DiffusionSpec: initial point must be interior");
  if (!spec.mu_y || !spec.sigma_y || !spec.g)
    throw std::invalid_argument("DiffusionSpec: missing coefficient function");
}

Tri tri_not(Tri a) {
  if (a == Tri::yes) return Tri::no;
  if (a == Tri::no) return Tri::yes;
  return Tri::unknown;
}

Tri tri_and(Tri a, Tri b) {
  if (a == Tri::no || b == Tri::no) return Tri::no;
  if (a == Tri::yes && b == Tri::yes) return Tri::yes;
  return Tri::unknown;
}

Tri tri_or(Tri a, Tri b) {
  if (a == Tri::yes || b == Tri::yes) return Tri::yes;
  if (a == Tri::no && b == Tri::no) return Tri::no;
  return Tri::unknown;
}

Tri from_class(EndpointClass c) {
  switch (c) {
    case EndpointClass::integrable: return Tri::yes;
    case EndpointClass::divergent: return Tri::no;
    default: return Tri::unknown;
  }
}

// Geometric approach grids toward both endpoints, for coefficient spot checks.
std::vector<double> interior_grid(const DiffusionSpec& spec) {
  std::vector<double> xs{spec.c, spec.x0};
  const double base = std::max(1.0, std::fabs(spec.c));
  for (int j = 1; j <= 10; ++j) {
    const double frac = 1.0 - std::ldexp(1.0, -j);
    if (std::isinf(spec.r))
      xs.push_back(spec.c + base * (std::ldexp(1.0, j) - 1.0));
    else
      xs.push_back(spec.c + (spec.r - spec.c) * frac);
    if (std::isinf(spec.l))
      xs.push_back(spec.c - base * (std::ldexp(1.0, j) - 1.0));
    else
      xs.push_back(spec.c + (spec.l - spec.c) * frac);
  }
  return xs;
}

void spot_check(const DiffusionSpec& spec, std::vector<std::string>& notes) {
  const std::vector<double> xs = interior_grid(spec);
  for (double x : xs) {
    const double mu = spec.mu_y(x);
    const double sig = spec.sigma_y(x);
    const double gg = spec.g(x);
    if (!std::isfinite(mu) || !std::isfinite(sig) || !std::isfinite(gg) || sig == 0.0) {
      std::ostringstream oss;
      oss << "coefficient spot-check failed at x = " << x << " (mu = " << mu
          << ", sigma = " << sig << ", g = " << gg << ")";
      throw std::invalid_argument(oss.str());
    }
  }
  std::ostringstream oss;
  oss << "coefficient spot-check passed at " << xs.size() << " interior points";
  notes.push_back(oss.str());
}

// Signed distance integral of a density between x and the endpoint, computed
// directly (never by differencing two large scale values, which would cancel
// catastrophically deep inside the probe windows).
Fn1 make_gap(const Fn1& dens, double e, bool is_right) {
  if (std::isinf(e)) {
    if (is_right)
      return [dens](double x) { return integrate_to_inf(dens, x, 0.0, 1e-8).value; };
    return [dens](double x) {
      return integrate_to_inf([dens](double u) { return dens(-u); }, -x, 0.0, 1e-8).value;
    };
  }
  auto ci = std::make_shared<CumulativeIntegral>(dens, e, 1e-13, 1e-9);
  if (is_right) return [ci](double x) { return -ci->at(x); };
  return [ci](double x) { return ci->at(x); };
}

const char* side_name(bool is_right) { return is_right ? "right" : "left"; }

void note_inconclusive(std::vector<std::string>& notes, bool is_right, const char* what,
                       const EndpointReport& rep) {
  std::ostringstream oss;
  oss << side_name(is_right) << " endpoint: " << what
      << " integrability inconclusive (fitted exponent " << rep.exponent << " over "
      << rep.windows << " windows)";
  notes.push_back(oss.str());
}

EndpointFindings analyze_endpoint(const DiffusionSpec& spec, ScaleObjects& so, bool is_right,
                                  std::vector<std::string>& notes) {
  const double e = is_right ? spec.r : spec.l;
  const bool infinite = std::isinf(e);
  const int side = is_right ? -1 : +1;
  double w0 = is_right ? spec.probe_r : spec.probe_l;
  if (!(w0 > 0.0)) {
    w0 = infinite ? std::max(10.0, 2.0 * std::fabs(spec.c))
                  : 0.5 * (is_right ? spec.r - spec.c : spec.c - spec.l);
  }
  const double anchor = infinite ? (is_right ? w0 : -w0) : e + side * w0;

  const Fn1 dens_tilde = [&so](double u) { return so.rho_tilde(u); };
  const Fn1 dens_plain = [&so](double u) { return so.rho(u); };

  EndpointFindings f;
  f.where = e;
  f.tilted_density = classify_endpoint(dens_tilde, e, side, w0);
  f.scale_density = classify_endpoint(dens_plain, e, side, w0);

  const double dir = is_right ? 1.0 : -1.0;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();

  const Tri tilde_finite = from_class(f.tilted_density.verdict);
  f.tilted_scale_limit = tilde_finite == Tri::yes
                             ? so.s_tilde(anchor) + dir * f.tilted_density.tail_estimate
                             : (tilde_finite == Tri::no ? dir * inf : nan);
  const Tri plain_finite = from_class(f.scale_density.verdict);
  f.scale_limit = plain_finite == Tri::yes
                      ? so.s(anchor) + dir * f.scale_density.tail_estimate
                      : (plain_finite == Tri::no ? dir * inf : nan);

  if (tilde_finite == Tri::yes) {
    const Fn1 gap = make_gap(dens_tilde, e, is_right);
    const Fn1 load = [gap, dens_tilde, sig = spec.sigma_y](double x) {
      return gap(x) / (dens_tilde(x) * sq(sig(x)));
    };
    f.tilted_exit_load = classify_endpoint(load, e, side, w0);
    f.tilted_exit = from_class(f.tilted_exit_load.verdict);
    if (f.tilted_exit == Tri::unknown)
      note_inconclusive(notes, is_right, "tilted exit load", f.tilted_exit_load);
  } else {
    f.tilted_exit = tilde_finite;  // divergent tilted scale: the endpoint is out of reach
    if (tilde_finite == Tri::unknown)
      note_inconclusive(notes, is_right, "tilted scale density", f.tilted_density);
  }

  if (plain_finite == Tri::yes) {
    const Fn1 gap = make_gap(dens_plain, e, is_right);
    const Fn1 load = [gap, dens_plain, g = spec.g, sig = spec.sigma_y](double x) {
      return gap(x) * sq(g(x)) / (dens_plain(x) * sq(sig(x)));
    };
    f.weighted_exit_load = classify_endpoint(load, e, side, w0);
    f.weighted_control = from_class(f.weighted_exit_load.verdict);
    if (f.weighted_control == Tri::unknown)
      note_inconclusive(notes, is_right, "weighted exit load", f.weighted_exit_load);
  } else {
    f.weighted_control = plain_finite;
    if (plain_finite == Tri::unknown)
      note_inconclusive(notes, is_right, "scale density", f.scale_density);
  }

  f.admissible = tri_or(tri_not(f.tilted_exit), f.weighted_control);
  return f;
}

}  // namespace

ScaleObjects::ScaleObjects(const DiffusionSpec& spec)
    : c_((validate_spec(spec), spec.c)),
      drift_part_(
          [mu = spec.mu_y, sig = spec.sigma_y](double u) { return 2.0 * mu(u) / sq(sig(u)); },
          spec.c, 1e-13, 1e-9, true),
      tilt_part_([g = spec.g, sig = spec.sigma_y](double u) { return 2.0 * g(u) / sig(u); },
                 spec.c, 1e-13, 1e-9, true),
      s_part_([this](double u) { return rho(u); }, spec.c, 1e-13, 1e-9, true),
      s_tilde_part_([this](double u) { return rho_tilde(u); }, spec.c, 1e-13, 1e-9, true) {}

double ScaleObjects::log_rho(double x) { return -drift_part_.at(x); }

double ScaleObjects::log_rho_tilde(double x) { return -drift_part_.at(x) - tilt_part_.at(x); }

double ScaleObjects::rho(double x) { return std::exp(log_rho(x)); }

double ScaleObjects::rho_tilde(double x) { return std::exp(log_rho_tilde(x)); }

double ScaleObjects::s(double x) { return s_part_.at(x); }

double ScaleObjects::s_tilde(double x) { return s_tilde_part_.at(x); }

long ScaleObjects::n_evals() const {
  return drift_part_.n_evals() + tilt_part_.n_evals() + s_part_.n_evals() +
         s_tilde_part_.n_evals();
}

double ScaleObjects::quad_error() const {
  return drift_part_.abs_error() + tilt_part_.abs_error() + s_part_.abs_error() +
         s_tilde_part_.abs_error();
}

ScalePoint scale_objects(const DiffusionSpec& spec, double x) {
  ScaleObjects so(spec);
  return {so.rho(x), so.rho_tilde(x), so.s(x), so.s_tilde(x)};
}

ClassifierReport classify(const DiffusionSpec& spec) {
  validate_spec(spec);
  ClassifierReport rep;
  spot_check(spec, rep.notes);
  ScaleObjects so(spec);

  rep.right = analyze_endpoint(spec, so, true, rep.notes);
  rep.left = analyze_endpoint(spec, so, false, rep.notes);

  const Tri both = tri_and(rep.right.admissible, rep.left.admissible);
  rep.verdict = both == Tri::yes    ? Verdict::true_martingale
                : both == Tri::no   ? Verdict::strict_local_martingale
                                    : Verdict::withheld;
  if (rep.verdict == Verdict::withheld)
    rep.notes.push_back("verdict withheld: endpoint analysis inconclusive");
  rep.n_evals = so.n_evals();
  return rep;
}

std::vector<double> limit_probe(const DiffusionSpec& spec, const std::vector<double>& xs) {
  validate_spec(spec);
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(-x * 2.0 * spec.g(x) / spec.sigma_y(x));
  return out;
}

}  // namespace slm
