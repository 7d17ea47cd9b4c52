#pragma once

#include <cstdint>
#include <random>

namespace odigen {

using Rng = std::mt19937_64;

// Stable stream derivation: mixes a master seed with a stream id so that
// independent consumers (data shuffling, dropout, init) never share state.
inline uint64_t derive_seed(uint64_t master, uint64_t stream) {
  uint64_t x = master * 0x9e3779b97f4a7c15ULL + stream + 1;
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

template <typename T>
T uniform(Rng& rng, T lo, T hi) {
  std::uniform_real_distribution<double> d(static_cast<double>(lo), static_cast<double>(hi));
  return static_cast<T>(d(rng));
}

template <typename T>
T gaussian(Rng& rng, T mean, T stddev) {
  std::normal_distribution<double> d(static_cast<double>(mean), static_cast<double>(stddev));
  return static_cast<T>(d(rng));
}

inline int uniform_int(Rng& rng, int lo, int hi_inclusive) {
  std::uniform_int_distribution<int> d(lo, hi_inclusive);
  return d(rng);
}

}  // namespace odigen
