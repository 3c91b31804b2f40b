#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>

namespace boincx {

// SplitMix64 finalizer. Used both for child-seed derivation and as a
// stand-alone avalanche mix.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Child seed for replication `rep` of (scenario, config) under `root`.
//   h0 = mix64(root); h1 = mix64(h0 ^ scenario); h2 = mix64(h1 ^ config);
//   seed = mix64(h2 ^ rep)
// The result depends only on the four integers, never on scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t scenario,
                                    std::uint64_t config,
                                    std::uint64_t rep) noexcept {
  std::uint64_t h = mix64(root);
  h = mix64(h ^ scenario);
  h = mix64(h ^ config);
  return mix64(h ^ rep);
}

// Portable random stream. std::mt19937_64 output is fixed by the standard;
// every distribution below is implemented here so draws are bit-identical
// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform index in [0, k). k must be positive.
  std::size_t uniform_index(std::size_t k) {
    const auto idx = static_cast<std::size_t>(uniform() * static_cast<double>(k));
    return idx < k ? idx : k - 1;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Sum of Bernoulli draws; cohort sizes are small.
  int binomial(int n, double p) {
    int count = 0;
    for (int k = 0; k < n; ++k) count += bernoulli(p) ? 1 : 0;
    return count;
  }

  // Box-Muller, one variate per call (no cached state).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace boincx
