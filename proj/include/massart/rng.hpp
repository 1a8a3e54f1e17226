#pragma once

#include <cstdint>
#include <random>

namespace massart {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive decorrelated child seeds from a master
// seed plus stream indices so independent runs never share an RNG stream.
inline std::uint64_t mix_seed(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0) {
  return mix_seed(mix_seed(master ^ (a * 0x9e3779b97f4a7c15ULL)) ^
                  (b * 0xc2b2ae3d27d4eb4fULL));
}

inline double uniform01(Rng &rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double normal(Rng &rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace massart
