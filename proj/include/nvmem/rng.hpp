#pragma once

#include <cstdint>
#include <random>

namespace nvmem {

// splitmix64; used to derive independent per-trajectory seeds from a base
// seed so ensembles shard deterministically across workers.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline double uniform01(std::mt19937_64& rng) {
  return std::generate_canonical<double, 53>(rng);
}

// Standard normal via Box-Muller; avoids distribution objects whose output
// sequences are implementation-defined.
inline double standard_normal(std::mt19937_64& rng) {
  const double u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(6.283185307179586 * u2);
}

// Cauchy deviate of half-width gamma; the static-detuning distribution whose
// ensemble FID average is the exponential envelope exp(-t/T2*).
inline double cauchy(std::mt19937_64& rng, double gamma) {
  const double u = uniform01(rng);
  return gamma * std::tan(3.14159265358979323846 * (u - 0.5));
}

} // namespace nvmem
