#pragma once

namespace slm {

inline constexpr double euler_gamma = 0.57721566490153286061;
inline constexpr double pi = 3.14159265358979323846;

// Error function, absolute error <= 1e-12 (actual ~1e-15): Taylor series for
// |x| <= 3, continued fraction for the complement beyond.
double erf_eval(double x);
double erfc_eval(double x);

// Exponentially scaled modified Bessel functions e^z K_nu(z), nu = 0, 1.
// Relative error ~1e-15 across (1e-300, 1e300); the scaled form never
// overflows. Unscaled variants underflow to 0 for z beyond ~700.
double bessel_k0_scaled(double z);
double bessel_k1_scaled(double z);
double bessel_k0(double z);
double bessel_k1(double z);

// e^z (K0(z) - K1(z)), negative; computed by asymptotic difference for huge z
// where direct subtraction loses all digits.
double k0_minus_k1_scaled(double z);

// Radial CDF of a standard 3D Gaussian: P(|Z| <= r) = erf(r/sqrt(2)) -
// sqrt(2/pi) r exp(-r^2/2). Series evaluation for small r avoids the
// catastrophic cancellation of the direct form.
double chi3_cdf(double r);

}  // namespace slm
