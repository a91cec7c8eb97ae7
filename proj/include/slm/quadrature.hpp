#pragma once

#include <functional>
#include <map>

namespace slm {

using Fn1 = std::function<double(double)>;

struct QuadResult {
  double value = 0.0;
  double abs_error = 0.0;  // estimated
  long n_evals = 0;
  bool converged = false;
};

// Globally adaptive Gauss-Kronrod (7,15) over a finite interval. Panel nodes
// are interior, so integrable endpoint singularities need no special casing.
QuadResult integrate(const Fn1& f, double a, double b, double abs_tol = 1e-10,
                     double rel_tol = 1e-10, int max_intervals = 2000);

// Integral over [a, +inf), compactified through x = a + u/(1-u).
QuadResult integrate_to_inf(const Fn1& f, double a, double abs_tol = 1e-10,
                            double rel_tol = 1e-10, int max_intervals = 2000);

// Running integral x -> int_anchor^x f. Values are memoized at every queried
// point and new queries only integrate the gap from the nearest known point,
// so scanning a monotone sequence of points costs one pass over the range.
// In strict mode a gap that fails to converge throws, naming the subinterval.
class CumulativeIntegral {
 public:
  CumulativeIntegral(Fn1 f, double anchor, double abs_tol = 1e-11, double rel_tol = 1e-11,
                     bool strict = false);

  double at(double x);
  long n_evals() const { return evals_; }
  double abs_error() const { return err_; }  // accumulated gap error estimates

 private:
  Fn1 f_;
  double abs_tol_, rel_tol_;
  bool strict_ = false;
  long evals_ = 0;
  double err_ = 0.0;
  std::map<double, double> memo_;  // point -> integral from anchor
};

enum class EndpointClass { integrable, divergent, inconclusive };

struct EndpointReport {
  EndpointClass verdict = EndpointClass::inconclusive;
  double exponent = 0.0;       // fitted local power of |f|
  double tail_estimate = 0.0;  // window mass seen (plus geometric tail if integrable)
  int windows = 0;
};

// Classify local integrability of |f| next to an endpoint from window-mass
// decay over dyadic windows. For finite e the windows shrink toward e on the
// side the interval lives on (side = +1 means the domain is to the right);
// for e = +-inf they grow outward from w0. A fitted window-ratio exponent
// beyond +-margin gives a verdict; ratios pinned at 1 are reported divergent
// (log-type boundary); anything else inside the margin stays inconclusive.
EndpointReport classify_endpoint(const Fn1& f, double e, int side, double w0,
                                 int max_windows = 48, double margin = 0.2);

}  // namespace slm
