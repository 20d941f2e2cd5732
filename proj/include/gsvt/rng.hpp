#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gsvt {

/// Deterministic draws on top of mt19937_64. The standard distributions are
/// implementation-defined, so anything that must reproduce bit-for-bit from
/// a seed goes through these helpers instead.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_range(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi_inclusive) {
  const uint64_t span = static_cast<uint64_t>(hi_inclusive - lo) + 1;
  return lo + static_cast<int>(rng() % span);
}

/// Box-Muller; consumes exactly two draws per call.
inline double normal01(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  double u2 = uniform01(rng);
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

} // namespace gsvt
