#pragma once

#include <cstdint>

namespace fracform {

/// Counter-based pseudo-random generator (splitmix64). Every random draw in
/// the library flows through this generator so that runs with equal seeds are
/// reproducible bit-for-bit across platforms; std:: distributions are avoided
/// on purpose (their output is implementation-defined).
struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
};

/// Derives an independent stream seed from (seed, stream). Sampling routines
/// give each sample its own stream, so a parallel sweep produces the same
/// values as a sequential one.
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace fracform
