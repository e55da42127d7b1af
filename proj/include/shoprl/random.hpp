#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace shoprl {

std::uint64_t splitmix64(std::uint64_t x);

/// Per-stage seed: splitmix64(master ^ fnv1a64(stage)).
std::uint64_t derive_seed(std::uint64_t master, std::string_view stage);

/// Per-item stream (episode, attempt, run): splitmix64(master + golden * (index + 1)).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Seeded mt19937_64 with the handful of draws the pipeline needs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). n must be positive.
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }
  /// Uniform integer in [lo, hi].
  std::size_t range(std::size_t lo, std::size_t hi) {
    return lo + index(hi - lo + 1);
  }
  bool bernoulli(double p) { return uniform() < p; }
  double gamma(double shape) {
    return std::gamma_distribution<double>(shape, 1.0)(engine_);
  }
  double beta(double a, double b);
  std::uint64_t next() { return engine_(); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace shoprl
