#pragma once

#include <cmath>
#include <cstdint>

namespace gbdl {

// Deterministic random stream (xoshiro256++) with the distributions the
// sampler needs. Distributions are implemented here rather than taken from
// <random> so that draws are identical across standard libraries and runs.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) { reseed(seed); }

  // Independent stream derived from (seed, a, b, c); used to give every
  // frame/group/purpose its own reproducible stream.
  Rng(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    uint64_t x = seed;
    x = mix(x + 0x9e3779b97f4a7c15ULL * (a + 1));
    x = mix(x + 0x9e3779b97f4a7c15ULL * (b + 1));
    x = mix(x + 0x9e3779b97f4a7c15ULL * (c + 1));
    reseed(x);
  }

  void reseed(uint64_t seed) {
    uint64_t x = seed;
    for (auto& w : s_) {
      x = mix(x + 0x9e3779b97f4a7c15ULL);
      w = x;
    }
  }

  uint64_t u64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1); never returns an exact endpoint.
  double uniform_pos() {
    double u;
    do {
      u = uniform();
    } while (u <= 0.0);
    return u;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller; the spare draw is discarded so the
  // stream position depends only on the call count.
  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Gamma(shape, rate) by Marsaglia-Tsang, shape boost for shape < 1.
  double gamma(double shape, double rate) {
    if (shape <= 0.0 || rate <= 0.0) return 0.0;
    if (shape < 1.0) {
      const double u = uniform_pos();
      return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_pos();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
  }

  // Beta(a, b); degenerate parameters collapse to the obvious endpoint.
  double beta(double a, double b) {
    if (a <= 0.0 && b <= 0.0) return 0.5;
    if (a <= 0.0) return 0.0;
    if (b <= 0.0) return 1.0;
    const double x = gamma(a, 1.0);
    const double y = gamma(b, 1.0);
    const double s = x + y;
    if (s <= 0.0) return a / (a + b);  // both draws underflowed
    return x / s;
  }

  // Raw stream state, for checkpointing.
  void save_state(uint64_t out[4]) const {
    for (int i = 0; i < 4; ++i) out[i] = s_[i];
  }
  void load_state(const uint64_t in[4]) {
    for (int i = 0; i < 4; ++i) s_[i] = in[i];
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  // splitmix64 finalizer
  static uint64_t mix(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  uint64_t s_[4];
};

}  // namespace gbdl
