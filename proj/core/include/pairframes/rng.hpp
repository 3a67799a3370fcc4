#pragma once

#include <cstdint>
#include <random>

namespace pf {

/// SplitMix64 output function (Steele, Lea & Flood).
std::uint64_t splitmix64_mix(std::uint64_t z);

/// Seed for replicate `index`: the (index + 1)-th output of a SplitMix64
/// stream started at `master_seed`. Replicates can be drawn in any order or
/// in parallel without sharing a generator.
std::uint64_t child_seed(std::uint64_t master_seed, std::uint64_t index);

/// Portable random source: std::mt19937_64 (whose output sequence is fixed by
/// the C++ standard) with all derived distributions implemented here, since
/// the standard library distributions differ between implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform integer in [0, n) by rejection; n == 1 consumes nothing.
  std::uint64_t uniform_index(std::uint64_t n);
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  bool bernoulli(double p) { return uniform01() < p; }
  /// Standard normal via Box-Muller (one value per call, two uniforms).
  double normal();
  /// Poisson by Knuth's multiplication method; intended for modest means.
  std::uint64_t poisson(double mean);

 private:
  std::mt19937_64 engine_;
};

}  // namespace pf
