#pragma once

#include <functional>
#include <string>
#include <vector>

#include "slm/bundle.hpp"

namespace slm {

// Weighted sample cloud standing in for a law on the line. Weights may be
// empty (uniform); they are interpreted up to normalization throughout.
struct EmpiricalLaw {
  std::vector<double> samples;
  std::vector<double> weights;  // empty => uniform
  std::string label;

  std::size_t size() const { return samples.size(); }
  McEstimate mean() const;
  double effective_size() const;  // (sum w)^2 / sum w^2; n when uniform
};

// Weighted empirical CDF, right-continuous. Built once over sorted samples.
class Ecdf {
 public:
  explicit Ecdf(const EmpiricalLaw& law);
  double operator()(double x) const;

  const std::vector<double>& points() const { return xs_; }
  const std::vector<double>& cumulative() const { return cum_; }

 private:
  std::vector<double> xs_;
  std::vector<double> cum_;  // normalized, nondecreasing, ends at 1
};

// Two-sample Kolmogorov-Smirnov distance between (possibly weighted) laws.
double ks_distance(const EmpiricalLaw& a, const EmpiricalLaw& b);

// One-sample distance against a reference CDF.
double ks_distance(const EmpiricalLaw& a, const std::function<double(double)>& cdf);

}  // namespace slm
