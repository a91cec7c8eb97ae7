#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "slm/bessel.hpp"
#include "slm/grid.hpp"
#include "slm/rng.hpp"
#include "slm/specfun.hpp"

using namespace slm;

namespace {
void check_rel(double got, double want, double tol) {
  REQUIRE(std::isfinite(got));
  CHECK(std::fabs(got - want) <= tol * std::fabs(want));
}
}  // namespace

// Reference values: mpmath 1.3.0 at 30+ digits.
TEST_CASE("projected density kernel frozen values") {
  check_rel(proj_b1b2(1.0, 0.0, 1.0), 0.7896399592356571, 1e-12);
  check_rel(proj_b1b2(0.3, 0.4, 0.5), 1.4115140086389165, 1e-12);
  check_rel(proj_b1b2(0.05, 0.0, 2.0), 2.3101861329595414, 1e-12);
  check_rel(proj_b1b2(2.0, -1.0, 0.25), 0.43708719785677951, 1e-12);
  check_rel(proj_b1b2(1.0, 1.0, 4.0), 0.49904556362419244, 1e-12);
  // short horizon: value collapses to 1/planar distance
  check_rel(proj_b1b2(3.0, 4.0, 1e-6), 0.19999999600000036, 1e-12);

  // rotational symmetry in the first two coordinates
  CHECK(proj_b1b2(0.3, 0.4, 0.5) == proj_b1b2(0.4, 0.3, 0.5));
  CHECK(proj_b1b2(0.3, 0.4, 0.5) == proj_b1b2(-0.3, 0.4, 0.5));
  CHECK(proj_b1b2(0.5, 0.0, 0.5) == proj_b1b2(0.0, -0.5, 0.5));

  CHECK_THROWS_AS(proj_b1b2(1.0, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(proj_b1b2(1.0, 0.0, -1.0), std::invalid_argument);
}

TEST_CASE("projected kernel is the conditional mean of the inverse radius") {
  // Conditioning on the first two coordinates leaves the third free:
  // average 1/sqrt(x^2+y^2+s^2) over s ~ N(0,t).
  const double x = 0.8, y = -0.3, t = 0.7;
  const long n = 400000;
  GaussStream gs(20240817, 7, 0);
  std::vector<double> v(n);
  const double r2 = x * x + y * y;
  const double sq = std::sqrt(t);
  for (long i = 0; i < n; ++i) {
    const double s = sq * gs.next();
    v[i] = 1.0 / std::sqrt(r2 + s * s);
  }
  const McEstimate est = plain_mean(v);
  REQUIRE(est.se < 0.01);
  CHECK(std::fabs(est.mean - proj_b1b2(x, y, t)) < 5.0 * est.se);
}

TEST_CASE("gradient factor frozen values and sign") {
  check_rel(psi_eval(1.0, 0.0, 1.0), -0.5648908472456582, 1e-12);
  check_rel(psi_eval(0.3, 0.4, 0.5), -3.5950025683048773, 1e-12);

  // x-derivative of the kernel equals x times the factor
  check_rel(2.0 * psi_eval(2.0, -1.0, 0.25), -0.167448185295897959, 1e-12);

  for (double x : {0.1, 0.5, 1.0, 2.0, 3.0})
    for (double y : {-2.0, -0.5, 0.0, 1.0})
      for (double t : {0.1, 0.5, 2.0}) CHECK(psi_eval(x, y, t) < 0.0);

  CHECK_THROWS_AS(psi_eval(1.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("gradient factor matches finite differences of the kernel") {
  const double h = 1e-5;
  for (double x : {0.4, 1.0, 2.0})
    for (double y : {-1.0, 0.3})
      for (double t : {0.25, 1.0}) {
        const double fd_x = (proj_b1b2(x + h, y, t) - proj_b1b2(x - h, y, t)) / (2.0 * h);
        CHECK(std::fabs(fd_x - x * psi_eval(x, y, t)) < 1e-7);
        const double fd_y = (proj_b1b2(x, y + h, t) - proj_b1b2(x, y - h, t)) / (2.0 * h);
        CHECK(std::fabs(fd_y - y * psi_eval(x, y, t)) < 1e-7);
      }
}

TEST_CASE("delayed projection frozen values and shape") {
  check_rel(delayed_projection(1.0, {0.5}), 0.8427007929497149, 1e-13);
  check_rel(delayed_projection(0.25, {0.5}), 0.24999999614568552, 1e-13);
  check_rel(delayed_projection(4.0, {0.5}), 1.1053055606729477, 1e-13);
  check_rel(delayed_projection(1.0, {1.0}), 0.6826894921370859, 1e-13);
  check_rel(delayed_projection(2.0, {0.125}), 1.6854015858994297, 1e-13);

  // saturation level sqrt(2/(pi*eps)); increasing, below the identity
  for (double eps : {0.125, 0.5, 2.0}) {
    const double cap = std::sqrt(2.0 / (pi * eps));
    check_rel(delayed_projection(1e8, {eps}), cap, 1e-12);
    double prev = 0.0;
    for (int i = -30; i <= 30; ++i) {
      const double m = std::pow(10.0, i / 10.0);
      const double f = delayed_projection(m, {eps});
      CHECK(f > prev);
      // strictly below the identity, but for tiny m the gap is sub-ulp
      CHECK(f <= m);
      CHECK(f < cap);
      prev = f;
    }
    CHECK(delayed_projection(1.0, {eps}) < 1.0);
  }

  CHECK_THROWS_AS(delayed_projection(0.0, {0.5}), std::invalid_argument);
  CHECK_THROWS_AS(delayed_projection(1.0, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(delayed_projection(1.0, {-0.5}), std::invalid_argument);
}

TEST_CASE("delayed slope frozen values and bounds") {
  check_rel(delayed_fprime(0.5, {0.5}), 0.9539882943107686, 1e-12);
  check_rel(delayed_fprime(1.0, {0.5}), 0.427593295529120166, 1e-12);
  check_rel(delayed_fprime(3.0, {0.5}), 0.026075430768957578, 1e-12);

  // slope stays inside (0,1): the projection is a contraction; below
  // m ~ 0.17 the gap to 1 falls under double resolution
  for (int i = -40; i <= 40; ++i) {
    const double m = std::pow(10.0, i / 10.0);
    const double fp = delayed_fprime(m, {0.5});
    CHECK(fp > 0.0);
    CHECK(fp <= 1.0);
    if (m >= 0.2) CHECK(fp < 1.0);
  }

  // slope is the centered difference quotient of the projection
  for (double m : {0.3, 1.0, 2.5}) {
    const double h = 1e-6 * m;
    const double fd =
        (delayed_projection(m + h, {0.5}) - delayed_projection(m - h, {0.5})) / (2.0 * h);
    CHECK(std::fabs(fd - delayed_fprime(m, {0.5})) < 1e-8);
  }
}

TEST_CASE("projected drift and volatility frozen values") {
  const DelayParams d{0.5};
  const DriftVol a = projected_drift_vol(0.5, d);
  check_rel(a.drift, -0.04133397070818411, 1e-12);
  check_rel(a.vol, -0.23849707357769216, 1e-12);
  const DriftVol b = projected_drift_vol(1.0, d);
  check_rel(b.drift, -0.8302149948411894, 1e-12);
  check_rel(b.vol, -0.427593295529120166, 1e-12);
  const DriftVol c = projected_drift_vol(3.0, d);
  check_rel(c.drift, -2.0194360859826321, 1e-12);
  check_rel(c.vol, -0.2346788769206182, 1e-12);

  // drift < 0 (mass leaks), vol = -m^2 * slope, |drift| below the global cap
  const double cap = std::sqrt(2.0 / pi) / (0.5 * std::sqrt(0.5));
  for (int i = -30; i <= 30; ++i) {
    const double m = std::pow(10.0, i / 10.0);
    const DriftVol dv = projected_drift_vol(m, d);
    CHECK(dv.drift <= 0.0);
    CHECK(dv.vol < 0.0);
    CHECK(std::fabs(dv.drift) <= cap);
    CHECK(dv.vol == -m * m * delayed_fprime(m, d));
  }
}

TEST_CASE("state tilt frozen values") {
  // eps = 1 instances; slope ~ -3m far out
  check_rel(girsanov_tilt_m(0.5, {1.0}), -0.5848432684464495, 1e-12);
  check_rel(girsanov_tilt_m(1.0, {1.0}), -2.4349495043718023, 1e-12);
  check_rel(girsanov_tilt_m(2.0, {1.0}), -5.7043087866684728, 1e-12);
  check_rel(girsanov_tilt_m(10.0, {1.0}), -29.940034293324027, 1e-12);

  // consistent with the drift/vol pair
  const DriftVol dv = projected_drift_vol(0.5, {0.5});
  check_rel(girsanov_tilt_m(0.5, {0.5}), -dv.drift / dv.vol, 1e-15);

  // vanishes fast for small state, grows linearly for large state
  CHECK(girsanov_tilt_m(1e-3, {1.0}) == 0.0);
  CHECK(girsanov_tilt_m(1e3, {1.0}) < -2900.0);
}

TEST_CASE("bounded tilt frozen values and cap") {
  const DelayParams d{0.5};
  check_rel(girsanov_tilt_mw(0.5, d), -0.03337429824422689, 1e-12);
  check_rel(girsanov_tilt_mw(1.0, d), -0.5815486787737261, 1e-12);
  check_rel(girsanov_tilt_mw(3.0, d), -1.6355962054030254, 1e-12);

  const double cap = 2.2567583341910251;  // sqrt(2/pi) eps^{-3/2}
  double worst = 0.0;
  for (int i = -30; i <= 60; ++i) {
    const double m = std::pow(10.0, i / 10.0);
    const double a = girsanov_tilt_mw(m, d);
    CHECK(a <= 0.0);
    CHECK(std::fabs(a) <= cap);
    worst = std::max(worst, std::fabs(a));
  }
  // the cap is sharp: approached as the state grows
  CHECK(worst > 0.99 * cap);
}

TEST_CASE("exact terminal sampling reproduces the shrinking mean") {
  struct Row {
    double t, want;
  };
  // E at time t is erf(1/sqrt(2t))
  const Row rows[] = {{0.5, 0.8427007929497149},
                      {1.0, 0.6826894921370859},
                      {2.0, 0.5204998778130465}};
  std::uint64_t stream = 0;
  for (const Row& r : rows) {
    const EmpiricalLaw law = sample_m_exact(r.t, 200000, 99001122, stream++);
    const McEstimate est = law.mean();
    REQUIRE(est.se < 0.01);
    CHECK(std::fabs(est.mean - r.want) < 5.0 * est.se);
  }

  // strict mass loss at t=1: more than 5 standard errors below the start
  const EmpiricalLaw law = sample_m_exact(1.0, 200000, 5150, 9);
  const McEstimate est = law.mean();
  CHECK(est.mean + 5.0 * est.se < 1.0);

  // t=0 collapses to the starting point
  const EmpiricalLaw degenerate = sample_m_exact(0.0, 100, 1, 0);
  for (double s : degenerate.samples) CHECK(s == 1.0);

  CHECK_THROWS_AS(sample_m_exact(-1.0, 10, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(sample_m_exact(1.0, 0, 1, 0), std::invalid_argument);
}

TEST_CASE("delayed sampling matches the closed-form conditional mean") {
  {
    const EmpiricalLaw law = sample_m_delayed(2.0, 0.125, 200000, 777, 0);
    const McEstimate est = law.mean();
    REQUIRE(est.se < 0.01);
    CHECK(std::fabs(est.mean - 1.6854015858994297) < 5.0 * est.se);
  }
  {
    const EmpiricalLaw law = sample_m_delayed(0.25, 0.5, 200000, 778, 0);
    const McEstimate est = law.mean();
    REQUIRE(est.se < 0.01);
    CHECK(std::fabs(est.mean - 0.24999999614568552) < 5.0 * est.se);
  }
  CHECK_THROWS_AS(sample_m_delayed(0.0, 0.5, 10, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(sample_m_delayed(1.0, 0.0, 10, 1, 0), std::invalid_argument);
}

TEST_CASE("two-stage sampling towers to the single-stage law") {
  const PairedSamples pair = sample_m_pair(0.5, 0.5, 200000, 424242, 0);
  const McEstimate first = plain_mean(pair.first);
  const McEstimate second = plain_mean(pair.second);
  REQUIRE(first.se < 0.01);
  REQUIRE(second.se < 0.01);
  CHECK(std::fabs(first.mean - 0.8427007929497149) < 5.0 * first.se);
  // time 0.5 plus delay 0.5 lands on the time-1 mean
  CHECK(std::fabs(second.mean - 0.6826894921370859) < 5.0 * second.se);
}

TEST_CASE("path bundle carries exact inverse radius and left-point increments") {
  const TimeGrid grid = build_grid(0.0, 1.0, 16);
  const PathBundle b = bessel_paths(grid, 64, 31337, 5);
  REQUIRE(b.n_components == 5);
  REQUIRE(b.names == std::vector<std::string>({"M", "B1", "B2", "B3", "W"}));
  REQUIRE(static_cast<int>(b.recorded.size()) == grid.n_nodes());

  for (int p = 0; p < b.n_paths; ++p) {
    CHECK(b.at(p, 0, 4) == 0.0);
    CHECK(b.at(p, 0, 0) == 1.0);
    for (int s = 0; s < static_cast<int>(b.recorded.size()); ++s) {
      const double m = b.at(p, s, 0);
      const double r = std::sqrt(b.at(p, s, 1) * b.at(p, s, 1) +
                                 b.at(p, s, 2) * b.at(p, s, 2) +
                                 b.at(p, s, 3) * b.at(p, s, 3));
      CHECK(m == 1.0 / r);
    }
    for (int s = 0; s + 1 < static_cast<int>(b.recorded.size()); ++s) {
      const double dw = b.at(p, s + 1, 4) - b.at(p, s, 4);
      const double dot = b.at(p, s, 1) * (b.at(p, s + 1, 1) - b.at(p, s, 1)) +
                         b.at(p, s, 2) * (b.at(p, s + 1, 2) - b.at(p, s, 2)) +
                         b.at(p, s, 3) * (b.at(p, s + 1, 3) - b.at(p, s, 3));
      // driving increment evaluated at the left node
      CHECK(std::fabs(dw - b.at(p, s, 0) * dot) < 1e-14 * (1.0 + std::fabs(dw)));
    }
  }

  // recording a subset reproduces the full-record values bit for bit
  const PathBundle sub = bessel_paths(grid, 64, 31337, 5, RecordSpec::only({4, 16}));
  for (int p = 0; p < 64; ++p)
    for (int c = 0; c < 5; ++c) {
      CHECK(sub.at(p, 0, c) == b.at(p, 4, c));
      CHECK(sub.at(p, 1, c) == b.at(p, 16, c));
    }

  // a one-step bundle is the exact terminal sampler in disguise (same draws;
  // instruction scheduling may differ between the two loops, so allow an ulp)
  const TimeGrid one = build_grid(0.0, 0.7, 1);
  const PathBundle ob = bessel_paths(one, 100, 2024, 3, RecordSpec::only({1}));
  const EmpiricalLaw ex = sample_m_exact(0.7, 100, 2024, 3);
  for (int p = 0; p < 100; ++p)
    CHECK(std::fabs(ob.at(p, 0, 0) - ex.samples[p]) <= 4e-16 * ex.samples[p]);

  CHECK_THROWS_AS(bessel_paths(grid, 0, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(bessel_paths(grid, 4, 1, 0, RecordSpec::only({17})), std::invalid_argument);
  CHECK_THROWS_AS(bessel_paths(grid, 4, 1, 0, RecordSpec::only({3, 3})), std::invalid_argument);
}

TEST_CASE("stopping at a planar disc restores the full mean") {
  // Unstopped, the time-1 mean is ~0.68; stopped at the disc of squared
  // radius 1/4 it must sit at 1: the stopped process is a bounded martingale.
  const LocalizedMean lm = bessel_localized_mean(1.0, 1024, 20000, 616161, 0.25, 2);
  REQUIRE(lm.estimate.se < 0.01);
  CHECK(std::fabs(lm.estimate.mean - 1.0) < 3.0 * lm.estimate.se);
  CHECK(lm.estimate.mean > 0.95);
  // pathwise cap: stopped states sit on the barrier, survivors stay outside
  CHECK(lm.max_level <= 2.0);
  CHECK(lm.n_stopped > 0);
  CHECK(lm.n_stopped < 20000);

  CHECK_THROWS_AS(bessel_localized_mean(0.0, 10, 10, 1, 0.25), std::invalid_argument);
  CHECK_THROWS_AS(bessel_localized_mean(1.0, 0, 10, 1, 0.25), std::invalid_argument);
  CHECK_THROWS_AS(bessel_localized_mean(1.0, 10, 10, 1, 1.5), std::invalid_argument);
}

TEST_CASE("near-origin clamp is observable and counted") {
  const long before = bessel_clamp_count();
  const Bessel3State s = make_bessel_state(1e-200, 0.0, 0.0);
  CHECK(s.m == 1e10);
  CHECK(bessel_clamp_count() == before + 1);
  const Bessel3State ok = make_bessel_state(0.6, -0.8, 0.0);
  CHECK(std::fabs(ok.m - 1.0) < 1e-15);
  CHECK(bessel_clamp_count() == before + 1);
}
