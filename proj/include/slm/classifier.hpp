#pragma once

#include <limits>
#include <string>
#include <vector>

#include "slm/quadrature.hpp"

namespace slm {

// One-dimensional autonomous diffusion on an open interval J = (l, r),
// together with the exponent function g of a candidate density process
// exp(int g dB - 1/2 int g^2 dt) driven along it.
struct DiffusionSpec {
  double l = 0.0;
  double r = std::numeric_limits<double>::infinity();
  Fn1 mu_y;      // drift on J
  Fn1 sigma_y;   // volatility, nonzero on J
  Fn1 g;         // exponent function
  double c = 1.0;   // interior reference point normalizing the scale objects
  double x0 = 1.0;  // interior initial point
  // Optional first endpoint-window widths for the integrability probes
  // (singularity hints); 0 picks a default from the interval geometry.
  double probe_l = 0.0;
  double probe_r = 0.0;
};

// Scale-type objects normalized at the reference point: rho(c) = rho_tilde(c)
// = 1, s(c) = s_tilde(c) = 0, s and s_tilde strictly increasing. Exponent
// integrals are accumulated in log space and exponentiated once per query.
// Queries are memoized; instances are neither copyable nor thread-safe.
class ScaleObjects {
 public:
  explicit ScaleObjects(const DiffusionSpec& spec);
  ScaleObjects(const ScaleObjects&) = delete;
  ScaleObjects& operator=(const ScaleObjects&) = delete;

  double log_rho(double x);
  double log_rho_tilde(double x);
  double rho(double x);
  double rho_tilde(double x);
  double s(double x);
  double s_tilde(double x);

  long n_evals() const;
  double quad_error() const;  // accumulated quadrature error estimates

 private:
  double c_;
  CumulativeIntegral drift_part_;  // int_c^x 2 mu / sigma^2
  CumulativeIntegral tilt_part_;   // int_c^x 2 g / sigma
  CumulativeIntegral s_part_;      // int_c^x rho
  CumulativeIntegral s_tilde_part_;
};

struct ScalePoint {
  double rho = 0.0;
  double rho_tilde = 0.0;
  double s = 0.0;
  double s_tilde = 0.0;
};

// One-shot evaluation at a single interior point (rebuilds the quadrature
// caches; prefer a ScaleObjects instance for repeated queries).
ScalePoint scale_objects(const DiffusionSpec& spec, double x);

enum class Tri { no, yes, unknown };

// Everything measured at one interval endpoint. The scale limits are +-inf
// when the corresponding density diverges there and NaN when inconclusive.
// Load reports stay at their defaults (windows == 0) when the prerequisite
// scale limit is not finite, since the integrand is undefined then.
struct EndpointFindings {
  double where = 0.0;
  double scale_limit = 0.0;         // s at the endpoint
  double tilted_scale_limit = 0.0;  // s_tilde at the endpoint
  EndpointReport scale_density;     // rho near the endpoint
  EndpointReport tilted_density;    // rho_tilde near the endpoint
  EndpointReport tilted_exit_load;    // (scale gap) / (rho_tilde sigma^2)
  EndpointReport weighted_exit_load;  // (scale gap) g^2 / (rho sigma^2)
  Tri tilted_exit = Tri::unknown;       // tilted diffusion reaches the endpoint
  Tri weighted_control = Tri::unknown;  // weighted exit condition holds
  Tri admissible = Tri::unknown;        // NOT tilted_exit OR weighted_control
};

enum class Verdict { true_martingale, strict_local_martingale, withheld };

struct ClassifierReport {
  Verdict verdict = Verdict::withheld;
  EndpointFindings right;
  EndpointFindings left;
  std::vector<std::string> notes;  // spot-check summary and blocking items
  long n_evals = 0;
};

// Decide whether the exponential of int g(Y) dB is a true martingale for the
// diffusion of the spec (the answer does not depend on the horizon): both
// endpoints admissible <=> true martingale. Any inconclusive integrability
// withholds the verdict and records the blocking item in notes. Coefficients
// are spot-checked on an interior grid first; failures throw.
ClassifierReport classify(const DiffusionSpec& spec);

// Pointwise values of -x * 2 g(x) / sigma_y(x): the tail driver of the tilted
// scale density. A flat value q at large x means rho_tilde decays like x^{-q};
// used to calibrate the windows for the power bounds.
std::vector<double> limit_probe(const DiffusionSpec& spec, const std::vector<double>& xs);

}  // namespace slm
