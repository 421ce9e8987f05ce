#pragma once

#include <cstdint>

namespace cmstress {

// splitmix64 (Vigna's public-domain mixer). Pinned as the only source of
// randomness in the library so that every result is reproducible bit for
// bit across platforms, runs and thread counts.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform draw in [0, n). Plain modulo: the bias is negligible for
  // n << 2^64 and the draw stays portable across languages.
  std::uint64_t next_below(std::uint64_t n) { return next() % n; }

  // Uniform double in [0, 1) with 53 mantissa bits.
  double next_unit() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

// The stream-th output of a splitmix64 generator seeded with `seed`,
// computed directly. Used to derive independent child streams (one per
// tree, one per experiment cell) from a single master seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + (stream + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace cmstress
