#pragma once

#include "specdesc/common.hpp"

#include <initializer_list>
#include <random>

namespace specdesc {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent generator for the stream addressed by `keys` under `seed`.
/// Streams depend only on (seed, keys), never on evaluation order.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t state = splitmix64(seed);
  for (auto k : keys) state = splitmix64(state ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  return std::mt19937_64(state);
}

inline Index uniform_index(std::mt19937_64& rng, Index n) {
  return std::uniform_int_distribution<Index>(0, n - 1)(rng);
}

}  // namespace specdesc
