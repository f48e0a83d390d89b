#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace parksearch {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; derives independent child seeds from a parent seed.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Uniform double in [0, 1) with 53 random bits. Used instead of
/// std::uniform_real_distribution so sample streams match across standard
/// libraries.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Exponential variate with the given rate, strictly positive.
inline double exponential(Rng& rng, double rate) {
  // open interval (0, 1) so the logarithm never returns zero or infinity
  double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
  return -std::log(u) / rate;
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

}  // namespace parksearch
