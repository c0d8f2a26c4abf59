#pragma once

#include <cstdint>
#include <random>

namespace rwcert {

/// Seeded generator with independent streams. Stream `k` of seed `s` is a
/// Mersenne Twister keyed by a splitmix64 mix of (s, k), so chains and MC
/// estimators that run side by side never share state. Copying an Rng
/// clones its full state, including any cached normal deviate.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  double uniform();  // [0, 1)
  double normal();
  double gamma(double shape, double scale);

  std::mt19937_64& engine() { return engine_; }

  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream);

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace rwcert
