#include "slm/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace slm {

McEstimate EmpiricalLaw::mean() const {
  if (samples.empty()) throw std::invalid_argument("EmpiricalLaw: empty");
  if (weights.empty()) return plain_mean(samples);
  if (weights.size() != samples.size())
    throw std::invalid_argument("EmpiricalLaw: weight/sample size mismatch");
  return weighted_mean(samples, weights);
}

double EmpiricalLaw::effective_size() const {
  if (weights.empty()) return static_cast<double>(samples.size());
  double sw = 0.0, sw2 = 0.0;
  for (double w : weights) {
    sw += w;
    sw2 += w * w;
  }
  if (sw2 <= 0.0) return 0.0;
  return sw * sw / sw2;
}

Ecdf::Ecdf(const EmpiricalLaw& law) {
  const std::size_t n = law.samples.size();
  if (n == 0) throw std::invalid_argument("Ecdf: empty law");
  if (!law.weights.empty() && law.weights.size() != n)
    throw std::invalid_argument("Ecdf: weight/sample size mismatch");

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t i, std::size_t j) { return law.samples[i] < law.samples[j]; });

  xs_.resize(n);
  cum_.resize(n);
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double w = law.weights.empty() ? 1.0 : law.weights[idx[k]];
    if (!(w >= 0.0)) throw std::invalid_argument("Ecdf: negative weight");
    total += w;
    xs_[k] = law.samples[idx[k]];
    cum_[k] = total;
  }
  if (total <= 0.0) throw std::invalid_argument("Ecdf: zero total weight");
  for (double& c : cum_) c /= total;
}

double Ecdf::operator()(double x) const {
  const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  if (it == xs_.begin()) return 0.0;
  return cum_[static_cast<std::size_t>(it - xs_.begin()) - 1];
}

double ks_distance(const EmpiricalLaw& a, const EmpiricalLaw& b) {
  const Ecdf fa(a), fb(b);
  // Evaluate sup |F_a - F_b| just after every jump point of either CDF.
  double d = 0.0;
  for (double x : fa.points()) d = std::max(d, std::fabs(fa(x) - fb(x)));
  for (double x : fb.points()) d = std::max(d, std::fabs(fa(x) - fb(x)));
  return d;
}

double ks_distance(const EmpiricalLaw& a, const std::function<double(double)>& cdf) {
  const Ecdf fa(a);
  const auto& xs = fa.points();
  const auto& cum = fa.cumulative();
  double d = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double f = cdf(xs[k]);
    const double lo = k == 0 ? 0.0 : cum[k - 1];
    d = std::max(d, std::max(std::fabs(cum[k] - f), std::fabs(f - lo)));
  }
  return d;
}

}  // namespace slm
