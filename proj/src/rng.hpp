#pragma once

#include <cstdint>
#include <random>

namespace clab {

using Rng = std::mt19937_64;

// SplitMix64 finalizer, used only for seed derivation.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent stream seed from a master seed and an index, so
// parallel trials reproduce regardless of scheduling order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x517cc1b727220a95ULL));
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace clab
