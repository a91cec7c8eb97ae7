#pragma once

#include <cmath>
#include <cstdint>

namespace slm {

// splitmix64: used to whiten stream ids into Philox keys.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Philox4x32-10 counter-based block cipher. The output block is a pure
// function of (key, counter), so any draw of any path can be regenerated
// without touching the draws of other paths.
struct PhiloxBlock {
  std::uint32_t v[4];
};

inline PhiloxBlock philox4x32(std::uint32_t c0, std::uint32_t c1, std::uint32_t c2,
                              std::uint32_t c3, std::uint32_t k0, std::uint32_t k1) {
  constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
  constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
  for (int r = 0; r < 10; ++r) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * c0;
    const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * c2;
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    c0 = hi1 ^ c1 ^ k0;
    c1 = lo1;
    c2 = hi0 ^ c3 ^ k1;
    c3 = lo0;
    k0 += W0;
    k1 += W1;
  }
  return {{c0, c1, c2, c3}};
}

// Raw 64-bit output stream for one (seed, stream, path) triple. Draws are
// consumed sequentially; the block counter is the draw index, so consumption
// order alone determines the values regardless of how paths are batched.
class RawStream {
 public:
  RawStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t path)
      : c0_(static_cast<std::uint32_t>(path)),
        c1_(static_cast<std::uint32_t>(path >> 32)) {
    const std::uint64_t k = seed ^ splitmix64(stream);
    k0_ = static_cast<std::uint32_t>(k);
    k1_ = static_cast<std::uint32_t>(k >> 32);
  }

  std::uint64_t next_u64() {
    if (have_) {
      have_ = false;
      return spare_;
    }
    const PhiloxBlock b = philox4x32(c0_, c1_, static_cast<std::uint32_t>(block_),
                                     static_cast<std::uint32_t>(block_ >> 32), k0_, k1_);
    ++block_;
    spare_ = (static_cast<std::uint64_t>(b.v[2]) << 32) | b.v[3];
    have_ = true;
    return (static_cast<std::uint64_t>(b.v[0]) << 32) | b.v[1];
  }

  // Uniform on (0,1]: never returns 0, so log() is safe.
  double next_unit() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

 private:
  std::uint32_t c0_, c1_, k0_, k1_;
  std::uint64_t block_ = 0;
  std::uint64_t spare_ = 0;
  bool have_ = false;
};

// N(0,1) stream via Box-Muller on top of RawStream. Exact given exact
// uniforms; used everywhere correctness matters more than speed.
class GaussStream {
 public:
  GaussStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t path)
      : raw_(seed, stream, path) {}

  double next() {
    if (have_) {
      have_ = false;
      return spare_;
    }
    const double u1 = raw_.next_unit();
    const double u2 = raw_.next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_ = true;
    return r * std::cos(a);
  }

  double next_unit() { return raw_.next_unit(); }

 private:
  RawStream raw_;
  double spare_ = 0.0;
  bool have_ = false;
};

// Ziggurat N(0,1) sampler (128 layers). Roughly 4x faster than Box-Muller;
// used by the hot simulation kernels. Rejection steps consume extra raw
// draws, which is fine: streams are per-path and strictly sequential.
class Ziggurat {
 public:
  static const Ziggurat& instance();

  double sample(RawStream& rs) const {
    for (;;) {
      const std::uint64_t r = rs.next_u64();
      const int idx = static_cast<int>(r & 127u);
      const double u = (static_cast<double>(r >> 11) + 0.5) * 0x1.0p-53;  // (0,1)
      const bool neg = (r & 128u) != 0;
      const double cand = u * x_[idx];
      if (cand < x_[idx + 1]) return neg ? -cand : cand;
      if (idx == 0) {
        // Base layer: sample the tail beyond R by inversion-rejection.
        double tx, ty;
        do {
          tx = -std::log(rs.next_unit()) / R;
          ty = -std::log(rs.next_unit());
        } while (ty + ty < tx * tx);
        const double v = R + tx;
        return neg ? -v : v;
      }
      const double fu = rs.next_unit();
      if (y_[idx] + fu * (y_[idx + 1] - y_[idx]) < std::exp(-0.5 * cand * cand))
        return neg ? -cand : cand;
    }
  }

 private:
  Ziggurat();
  static constexpr double R = 3.442619855899;
  double x_[130];
  double y_[130];
};

}  // namespace slm
