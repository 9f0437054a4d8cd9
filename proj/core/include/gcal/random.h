#ifndef GCAL_RANDOM_H_
#define GCAL_RANDOM_H_

// std::mt19937_64 output is fully specified by the standard, but the
// distributions are not. Index draws and shuffles go through these helpers so
// seeded runs agree across standard libraries.

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace gcal {

// SplitMix64 finalizer; used to derive independent seeds from tuples.
inline std::uint64_t MixSeed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t MixSeed(std::uint64_t a, std::uint64_t b) {
  return MixSeed(MixSeed(a) ^ (b + 0x632be59bd9b4e019ull));
}

// Uniform integer in [0, n) by rejection; n > 0.
inline std::uint64_t UniformIndex(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

template <typename T>
void Shuffle(std::vector<T>& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[UniformIndex(rng, i)]);
  }
}

// Uniform real in [0, 1) from the top 53 bits.
inline double UniformUnit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace gcal

#endif  // GCAL_RANDOM_H_
