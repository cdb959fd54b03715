#pragma once

#include <cstdint>
#include <random>

namespace spinsq {

/// The engine used by every sampler. mt19937_64 output is fully specified by
/// the standard, so seeded runs reproduce across platforms.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Derives the seed of an independent child stream (a Monte Carlo trial, a
/// dataset block) from a master seed:
///
///   mix64(master, i) = splitmix64(splitmix64(master) ^ (i * 0xD1B54A32D192ED03))
///
/// Child streams depend only on (master, i), never on evaluation order.
constexpr std::uint64_t mix64(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ (index * 0xD1B54A32D192ED03ULL));
}

/// Uniform double in [0, 1) built from the top 53 bits of one engine draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace spinsq
