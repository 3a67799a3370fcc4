#include "pairframes/rng.hpp"

#include <cmath>
#include <numbers>

#include "pairframes/error.hpp"

namespace pf {

std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t child_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64_mix(master_seed + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  if (n == 0) throw ArgumentError("uniform_index: empty range");
  if (n == 1) return 0;
  // Largest multiple of n representable in 64 bits; draws at or above it
  // are rejected so every residue is equally likely.
  const std::uint64_t limit = std::uint64_t(0) - (std::uint64_t(0) - n) % n;
  while (true) {
    const std::uint64_t x = engine_();
    if (limit == 0 || x < limit) return x % n;
  }
}

double Rng::uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  double u1 = uniform01();
  const double u2 = uniform01();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::poisson(double mean) {
  if (!(mean >= 0.0) || mean > 700.0) throw ArgumentError("poisson: mean must be in [0, 700]");
  const double limit = std::exp(-mean);
  std::uint64_t k = 0;
  double product = uniform01();
  while (product > limit) {
    ++k;
    product *= uniform01();
  }
  return k;
}

}  // namespace pf
