#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace gprune {

/// Seedable generator whose output stream is identical on every platform.
/// The engine is std::mt19937_64 (its sequence is fixed by the standard);
/// every conversion to doubles and bounded integers is done here rather than
/// through <random> distributions, whose output is implementation-defined.
class Rng {
 public:
  static constexpr std::string_view kName = "mt19937_64+splitmix64";

  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  /// Uniform integer on [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via Box-Muller.
  double normal();
  /// Uniformly random permutation of {0, ..., n-1} (Fisher-Yates).
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Seed for item `index` of a run seeded with `base`; independent of
/// evaluation order, so parallel runs reproduce sequential ones.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace gprune
