#pragma once

#include <cstdint>
#include <random>

namespace qfe {

using Rng = std::mt19937_64;

/// splitmix64 step, used to decorrelate derived seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stable per-stream seed: same (master, a, b) always yields the same stream,
/// distinct tuples yield decorrelated streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t s = splitmix64(master);
  s = splitmix64(s ^ (a * 0x9e3779b97f4a7c15ULL + 1));
  s = splitmix64(s ^ (b * 0xd1b54a32d192ed03ULL + 1));
  return s;
}

inline Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed)); }

/// Uniform in [0, 1) with 53 random bits.
inline double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform on the half-open interval (lo, hi]. Built from 1 - u so the lower
/// endpoint is excluded and the upper one attainable.
inline double uniform_open_closed(Rng& rng, double lo, double hi) {
  return hi - uniform_unit(rng) * (hi - lo);
}

}  // namespace qfe
