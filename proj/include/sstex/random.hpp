#pragma once

// Portable seeded randomness. std distributions are implementation-defined,
// so draws are built directly on mt19937_64, whose output is standardized.

#include <cstdint>
#include <random>
#include <vector>

namespace sstex {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stable seed for (master, a, b); adding sizes never perturbs other points.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) noexcept {
  return mix64(mix64(mix64(master) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n), unbiased.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do x = engine_();
    while (x >= limit);
    return x % n;
  }

  /// Standard normal via Box-Muller (spare value cached).
  double normal();

  /// Fisher-Yates permutation of [0, n).
  std::vector<int> permutation(int n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace sstex
