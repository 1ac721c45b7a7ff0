// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace hlmsim {

/// SplitMix64 finalizer. Used for seed scrambling and stream derivation only,
/// never as the draw engine itself.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Derives an independent stream seed from (seed, key). Avalanches both inputs
/// so structured keys (0, 1, 2, ...) do not produce correlated streams.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t key) {
  return splitmix64(splitmix64(seed) ^ splitmix64(key));
}

/// Deterministic seeded generator.
///
/// Algorithm (fixed): std::mt19937_64 seeded with splitmix64(seed). The
/// standard pins mt19937_64 output bit-exactly, so identical seed + identical
/// call sequence gives identical draws on every conforming implementation.
///
/// Stream splitting: child(index) derives an independent generator with seed
/// mix_seed(seed, index). The decoding harness gives every decoding step its
/// own child stream, so a gate decision that consumes extra draws in one step
/// can never shift the draws seen by any other step.
///
/// Derived variates avoid std::*_distribution on purpose: those are
/// implementation-defined, which would break cross-platform trace replay.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

  std::uint64_t seed() const { return seed_; }

  SeededRng child(std::uint64_t index) const { return SeededRng(mix_seed(seed_, index)); }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits. Consumes exactly one u64.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Exponential(mean 1) via inverse CDF. Consumes exactly one uniform.
  double next_exponential() { return -std::log1p(-next_double()); }

  /// Standard normal via Box-Muller. Consumes exactly two uniforms.
  double next_gaussian() {
    const double u1 = next_double();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    return r * std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace hlmsim
