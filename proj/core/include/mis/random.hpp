#pragma once

#include <cstdint>
#include <random>

#include "mis/types.hpp"

namespace mis {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent substreams from a base seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return mix_seed(mix_seed(base) ^ (stream * 0xd1b54a32d192ed03ULL + 1));
}

/// Circularly symmetric complex Gaussian with unit variance.
inline cplx complex_normal(Rng& rng) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

inline CVec complex_normal_vector(Rng& rng, Eigen::Index size) {
  CVec out(size);
  for (Eigen::Index i = 0; i < size; ++i) out(i) = complex_normal(rng);
  return out;
}

inline CVec random_unit_modulus(Rng& rng, Eigen::Index size) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
  CVec out(size);
  for (Eigen::Index i = 0; i < size; ++i) out(i) = std::polar(1.0, u(rng));
  return out;
}

}  // namespace mis
