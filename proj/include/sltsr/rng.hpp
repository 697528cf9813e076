#pragma once

#include <cstdint>
#include <random>

namespace sltsr {

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Portable pseudo-random source.
///
/// Wraps std::mt19937_64, whose output sequence is fixed by the standard, and
/// derives bounded integers, uniforms and normals with our own arithmetic so
/// the values do not depend on the standard library's distribution classes.
/// Patterns and noise are therefore identical on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, bound). Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t bound);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Standard normal via the Box-Muller transform.
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace sltsr
