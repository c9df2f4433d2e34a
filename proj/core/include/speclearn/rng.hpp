#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace speclearn {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Deterministic random source. std::mt19937_64 is fully specified by the
// standard; the distribution transforms are implemented here explicitly so
// draws are reproducible independent of the standard library in use.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), eng_(splitmix64(seed)) {}

  uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Uniform integer in [0, n). Rejection sampling, no modulo bias.
  int64_t uniform_int(int64_t n) {
    const uint64_t un = static_cast<uint64_t>(n);
    const uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return static_cast<int64_t>(x % un);
  }

  // Standard normal via Box-Muller. No cached second value, so the draw
  // sequence is a pure function of the engine state.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Circularly-symmetric complex Gaussian with E|z|^2 == power.
  std::complex<double> cnormal(double power) {
    const double s = std::sqrt(power / 2.0);
    return {normal(0.0, s), normal(0.0, s)};
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Independent substream derived from the original seed. Streams with
  // distinct ids never collide regardless of how much either has drawn.
  Rng fork(uint64_t stream) const {
    return Rng(splitmix64(seed_ ^ (0xD1B54A32D192ED03ull * (stream + 1))));
  }

  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_;
  std::mt19937_64 eng_;
};

}  // namespace speclearn
