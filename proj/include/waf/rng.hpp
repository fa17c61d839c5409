#pragma once

#include <cmath>
#include <cstdint>

namespace waf {

// Counter-based deterministic RNG built on splitmix64.
//
// A master seed plus a stream counter (e.g. a sample index) produces an
// independent stream, so generation can be parallelized or reordered
// without changing any draw. All values are reproducible across platforms:
// only integer arithmetic and IEEE doubles are involved.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  // Independent sub-stream for (seed, counter). Mixing the counter through
  // one splitmix step decorrelates neighbouring counters.
  static SplitMix64 stream(std::uint64_t seed, std::uint64_t counter) {
    SplitMix64 g(seed ^ mix(counter + 0x9E3779B97F4A7C15ULL));
    g.next();  // discard one output so seed==0 streams are also mixed
    return g;
  }

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  // Uniform double in [0, 1) with 53 random mantissa bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (consumes two uniforms).
  double normal();

  // Uniform integer in [0, n) by rejection-free scaling (n ≤ 2^32 expected).
  std::uint64_t below(std::uint64_t n) { return next() % n; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

inline double SplitMix64::normal() {
  // Box-Muller; u1 is kept away from zero so log() stays finite.
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  double r = -2.0 * std::log(u1);
  r = r < 0.0 ? 0.0 : r;
  return std::sqrt(r) * std::cos(kTwoPi * u2);
}

}  // namespace waf
