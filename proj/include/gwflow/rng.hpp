#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gwflow {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based stream derivation: seed xor splitmix(index).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return seed ^ splitmix64(index);
}

/// Seed for the Poisson stream of one row. Rows are independent and
/// reproducible regardless of the order they are generated in.
constexpr std::uint64_t row_seed(std::uint64_t seed, std::int64_t row) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(row) + 0x5851f42d4c957f2dULL));
}

/// mt19937_64 with distribution code written out so that draws are identical
/// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t bits() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, range), range > 0.
  std::uint64_t below(std::uint64_t range) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(engine_()) * range) >> 64);
  }

  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  /// Knuth multiplication for small means, normal-free inversion otherwise.
  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 30.0) {
      const double limit = std::exp(-mean);
      double prod = uniform();
      std::uint64_t k = 0;
      while (prod > limit) {
        ++k;
        prod *= uniform();
      }
      return k;
    }
    // Sum of unit-rate exponentials below mean.
    std::uint64_t k = 0;
    double acc = exponential(1.0);
    while (acc <= mean) {
      ++k;
      acc += exponential(1.0);
    }
    return k;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gwflow
