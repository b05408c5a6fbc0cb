#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace glmcomb {

/// Name recorded in output metadata. Bumped whenever the sampling
/// arithmetic changes so that stored replicates stay reproducible.
inline constexpr std::string_view kRngAlgorithm = "mt19937_64+boxmuller53/v1";

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Mix a base seed with any number of stream indices.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a);
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b);

/// Portable random source: std::mt19937_64 (output fixed by the standard)
/// with uniforms built from the top 53 bits and normals by Box-Muller.
/// Unlike std::normal_distribution the output does not depend on the
/// standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace glmcomb
