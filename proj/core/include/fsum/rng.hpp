#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace fsum {

// Deterministic random helpers on top of std::mt19937_64. The distributions
// are hand-rolled so that a given seed produces the same stream on every
// platform and standard library.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  // Derives an independent stream for (seed, stream); used for per-iteration
  // bootstrap seeds so results do not depend on execution order.
  static Rng for_stream(uint64_t seed, uint64_t stream) {
    return Rng(mix(seed, stream));
  }

  // Deterministic child-seed derivation (splitmix64 finalizer over the pair);
  // lets callers hand distinct sub-seeds to named consumers.
  static uint64_t derive(uint64_t seed, uint64_t stream) { return mix(seed, stream); }

  uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return (eng_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n); rejection sampling, no modulo bias.
  uint64_t bounded(uint64_t n) {
    const uint64_t threshold = (0 - n) % n;
    for (;;) {
      uint64_t r = eng_();
      if (r >= threshold) return r % n;
    }
  }

  // Standard normal via Box-Muller; caches the spare deviate.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    double mag = std::sqrt(-2.0 * std::log(u1));
    double ang = 2.0 * 3.14159265358979323846 * u2;
    spare_ = mag * std::sin(ang);
    has_spare_ = true;
    return mag * std::cos(ang);
  }

 private:
  static uint64_t mix(uint64_t a, uint64_t b) {
    // splitmix64 finalizer over the pair
    uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fsum
