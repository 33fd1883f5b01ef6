#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace tmcmc {

/// Seed for chain `chain` of a run seeded with `seed`.
///
/// The mixing function is part of the output contract: splitmix64 applied to
/// `seed ^ (0x9e3779b97f4a7c15 * (chain + 1))`. Chains of one run therefore
/// get decorrelated engine seeds, and chain 0 never reuses the raw run seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t chain) {
  std::uint64_t z = seed ^ (0x9e3779b97f4a7c15ULL * (chain + 1));
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Per-chain random source. Owns its engine and the normal sampler state so
/// the stream is fully determined by the seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform draw on [0, 1).
  double uniform() { return std::generate_canonical<double, 53>(engine_); }

  double normal() { return normal_(engine_); }

  /// Draw from |N(0, scale^2)|.
  double half_normal(double scale) { return scale * std::fabs(normal()); }

  /// Uniform integer on {0, ..., n - 1}.
  std::size_t index(std::size_t n) {
    auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace tmcmc
