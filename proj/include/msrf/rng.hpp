#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace msrf {

// splitmix64; used to derive decorrelated stream seeds from (seed, tags).
inline uint64_t hash_mix(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t seed, uint64_t tag_a, uint64_t tag_b = 0,
                            uint64_t tag_c = 0) {
  uint64_t h = hash_mix(seed);
  h = hash_mix(h ^ tag_a);
  h = hash_mix(h ^ tag_b);
  return hash_mix(h ^ tag_c);
}

// mt19937_64 with hand-pinned draw helpers so sequences do not depend on the
// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of mantissa.
  double uniform() { return (engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n); n > 0.
  uint64_t uniform_int(uint64_t n) {
    // Rejection-free modulo is fine here: n is tiny relative to 2^64.
    return engine_() % n;
  }

  // Box-Muller; one value per call, the pair's second half is discarded to
  // keep the stream position independent of call parity.
  double normal(double mean = 0.0, double stddev = 1.0) {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    return mean + stddev * z;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace msrf
