#pragma once

#include <cstdint>
#include <string_view>

namespace sentinel {

/// SplitMix64 (Steele, Lea, Flood 2014). Used for seeding and hashing.
///   z += 0x9E3779B97F4A7C15
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
std::uint64_t splitmix64(std::uint64_t& state);

/// 64-bit FNV-1a (offset 0xcbf29ce484222325, prime 0x100000001b3).
std::uint64_t fnv1a64(std::string_view bytes);

/// xoshiro256** 1.0 (Blackman, Vigna). State is filled from SplitMix64(seed).
///
/// All distributions below are derived from next() with fixed arithmetic so
/// a reimplementation in another language reproduces the same streams;
/// std::*_distribution is intentionally avoided since its algorithms are
/// implementation-defined.
class Rng {
public:
  explicit Rng(std::uint64_t seed);

  /// Independent stream for one named entity: seeded by
  /// splitmix64(seed ^ fnv1a64(name)).
  static Rng substream(std::uint64_t seed, std::string_view name);

  std::uint64_t next();

  /// Uniform double in [0, 1) from the top 53 bits.
  double uniform();
  double uniform(double lo, double hi);
  /// Uniform integer in [lo, hi] (inclusive).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  bool bernoulli(double p);
  /// Poisson draw by inverse-CDF sequential search.
  std::int64_t poisson(double mean);
  /// Standard normal via Box-Muller (one value per call, no caching).
  double normal();
  double normal(double mean, double sd);

private:
  std::uint64_t s_[4];
};

}  // namespace sentinel
