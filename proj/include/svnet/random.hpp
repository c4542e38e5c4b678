// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

namespace svnet {

using Rng = std::mt19937_64;

/// Independent child stream derived from a base seed and a stream tag
/// (splitmix64 finalizer), so that e.g. mobility and channel draws do not
/// interleave.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return Rng(z);
}

/// Gamma variate with the given mean and squared coefficient of variation.
/// scv == 0 degenerates to the constant mean.
template <class Urbg>
double sample_gamma_mean_scv(Urbg& rng, double mean, double scv) {
  if (scv <= 0.0) return mean;
  const double shape = 1.0 / scv;
  std::gamma_distribution<double> g(shape, mean / shape);
  return g(rng);
}

}  // namespace svnet
