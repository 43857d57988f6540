#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace plcsim {

/// splitmix64 finalizer. A bijection on 64-bit words, so distinct inputs never collide.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seeded random stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the standard. The
/// distributions are written out here because the <random> distribution templates are
/// implementation-defined and would break cross-platform reproducibility.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream keyed by (seed, tag).
  static Rng substream(std::uint64_t seed, std::uint64_t tag) { return Rng(mix64(seed ^ mix64(tag))); }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller; one variate per call, no cached pair.
  double normal() {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double lognormal(double median, double sigma) { return median * std::exp(sigma * normal()); }

  /// Poisson variate. Knuth's product method applied to chunks of mean at most 16; a sum of
  /// independent Poisson variates is Poisson with the summed mean.
  std::uint64_t poisson(double mean) {
    std::uint64_t count = 0;
    double remaining = mean;
    while (remaining > 0.0) {
      const double chunk = std::min(remaining, 16.0);
      remaining -= chunk;
      const double limit = std::exp(-chunk);
      double product = 1.0;
      for (;;) {
        product *= uniform01();
        if (product <= limit) break;
        ++count;
      }
    }
    return count;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace plcsim
