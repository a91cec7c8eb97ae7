#include "slm/rng.hpp"

namespace slm {

// 128-layer table: every layer has area V; x_[0] = V/f(R) so the base strip
// (rectangle part plus tail) also has area V.
Ziggurat::Ziggurat() {
  constexpr double V = 9.91256303526217e-3;
  const double fR = std::exp(-0.5 * R * R);
  x_[0] = V / fR;
  x_[1] = R;
  for (int k = 1; k <= 127; ++k) {
    const double arg = V / x_[k] + std::exp(-0.5 * x_[k] * x_[k]);
    x_[k + 1] = arg >= 1.0 ? 0.0 : std::sqrt(-2.0 * std::log(arg));
  }
  x_[128] = 0.0;
  x_[129] = 0.0;
  y_[0] = fR;
  for (int k = 1; k <= 128; ++k) y_[k] = std::exp(-0.5 * x_[k] * x_[k]);
  y_[129] = 1.0;
}

const Ziggurat& Ziggurat::instance() {
  static const Ziggurat z;
  return z;
}

}  // namespace slm
