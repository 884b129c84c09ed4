#pragma once

#include <cmath>
#include <cstdint>

#include "thermo_entangle/common.hpp"

namespace thermo_entangle {

/// SplitMix64 (Steele, Lea, Burdick: "Fast splittable pseudorandom number
/// generators"). Chosen for sampling because it is trivially splittable:
/// every sample index gets its own sub-stream derived from (seed, index)
/// alone, so a parallel run partitioned across any number of workers emits
/// byte-identical output to a serial one.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  /// Sub-stream rule: state = mix(mix(seed) ^ ((index+1) * SPREAD) ) where
  /// SPREAD is an odd 64-bit constant. The double mix decorrelates nearby
  /// seeds and nearby indices.
  static SplitMix64 substream(std::uint64_t seed, std::uint64_t index) {
    constexpr std::uint64_t kSpread = 0xD2B74407B1CE6E93ULL;
    return SplitMix64(mix(mix(seed) ^ ((index + 1) * kSpread)));
  }

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform draw in (0, 1]: 53 high bits, shifted off zero so that ln(u)
  /// is always finite.
  double uniform_open_closed() {
    constexpr double kScale = 0x1.0p-53;
    return (double(next() >> 11) + 1.0) * kScale;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

/// Geometric draw with success weight g in [0, 1): returns n >= 0 with
/// P(n) = (1-g) g^n, by inverse CDF: n = floor(ln u / ln g), u in (0, 1].
/// Exact and O(1); u = 1 maps to n = 0.
inline int sample_geometric(SplitMix64& gen, double g) {
  if (g < 0.0 || g >= 1.0) throw DomainError("sample_geometric: weight must lie in [0, 1)");
  const double u = gen.uniform_open_closed();
  if (g == 0.0) return 0;
  return static_cast<int>(std::floor(std::log(u) / std::log(g)));
}

/// Binomial draw by inverse-CDF scan over the pmf computed with the ratio
/// recurrence pmf(k+1)/pmf(k) = (n-k)/(k+1) * p/(1-p). O(n) worst case, but
/// occupation totals here are small. The scan falls through to n when
/// accumulated rounding leaves the CDF marginally short of u.
inline int sample_binomial(SplitMix64& gen, int n, double p) {
  if (n < 0) throw DomainError("sample_binomial: count must be non-negative");
  if (p < 0.0 || p > 1.0) throw DomainError("sample_binomial: probability must lie in [0, 1]");
  if (n == 0 || p == 0.0) {
    gen.next();  // keep stream positions aligned across branches
    return 0;
  }
  if (p == 1.0) {
    gen.next();
    return n;
  }
  const double u = gen.uniform_open_closed();
  const double ratio = p / (1.0 - p);
  double pmf = std::pow(1.0 - p, n);
  double cdf = pmf;
  int k = 0;
  while (cdf < u && k < n) {
    pmf *= ratio * double(n - k) / double(k + 1);
    cdf += pmf;
    ++k;
  }
  return k;
}

}  // namespace thermo_entangle
