#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace vbpi {

using Rng = std::mt19937_64;

inline uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based stream derivation: the same (seed, counters...) always yields the
// same generator, independent of how many other streams were drawn before it.
inline Rng StreamRng(uint64_t seed, std::initializer_list<uint64_t> counters) {
  uint64_t state = SplitMix64(seed);
  for (uint64_t c : counters) state = SplitMix64(state ^ SplitMix64(c + 0x632be59bd9b4e019ULL));
  std::seed_seq seq{uint32_t(state), uint32_t(state >> 32)};
  return Rng(seq);
}

}  // namespace vbpi
