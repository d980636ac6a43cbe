#pragma once

#include <cstdint>
#include <random>

namespace wiplus {

using Rng = std::mt19937_64;

/// splitmix64 finaliser; gives independent streams for drop/window/seed indices
/// so parallel and sequential runs draw identical numbers.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace wiplus
