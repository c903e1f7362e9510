#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace svwa {

/// Derives a child seed from (base, stream). Fixed splitmix64 finalizer, so the
/// derivation is identical on every platform. For a fixed base the map
/// stream -> seed is injective.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) noexcept;

/// Seeded generator with platform-independent distributions.
///
/// std::mt19937_64 output is fully specified by the standard, but the
/// <random> distribution adaptors are not, so the transforms live here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::size_t index(std::size_t n);

  /// Standard normal via Box-Muller (one draw per call, no cached spare).
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace svwa
