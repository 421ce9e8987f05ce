#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace cmstress {

// Incremental FNV-1a (64 bit). Used for model checksums and vocabulary
// fingerprints; not cryptographic.
struct Fnv1a64 {
  std::uint64_t value = 0xCBF29CE484222325ULL;

  void update(std::string_view bytes) {
    for (unsigned char c : bytes) {
      value ^= c;
      value *= 0x100000001B3ULL;
    }
  }

  void update_u64(std::uint64_t x) {
    for (int i = 0; i < 8; ++i) {
      value ^= static_cast<unsigned char>(x >> (8 * i));
      value *= 0x100000001B3ULL;
    }
  }
};

inline std::uint64_t fnv1a64(std::string_view bytes) {
  Fnv1a64 h;
  h.update(bytes);
  return h.value;
}

inline std::string to_hex(std::uint64_t x) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[x & 0xF];
    x >>= 4;
  }
  return out;
}

}  // namespace cmstress
