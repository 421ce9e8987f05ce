#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cmstress::utf8 {

// Decodes the code point starting at byte offset `i`, advancing `i`.
// Malformed sequences fall back to a single byte decoded as Latin-1, so
// any byte string decodes without errors and decode-then-encode of valid
// UTF-8 is the identity.
inline char32_t decode_next(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len;
  char32_t acc;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    acc = b0 & 0x1FU;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    acc = b0 & 0x0FU;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    acc = b0 & 0x07U;
  } else {
    ++i;
    return b0;
  }
  if (i + static_cast<std::size_t>(len) > s.size()) {
    ++i;
    return b0;
  }
  for (int k = 1; k < len; ++k) {
    const auto bk = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
    if ((bk & 0xC0) != 0x80) {
      ++i;
      return b0;
    }
    acc = (acc << 6) | (bk & 0x3FU);
  }
  i += static_cast<std::size_t>(len);
  return acc;
}

inline void encode(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

inline std::vector<char32_t> decode(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) out.push_back(decode_next(s, i));
  return out;
}

inline std::string encode_range(const char32_t* begin, std::size_t n) {
  std::string out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) encode(begin[k], out);
  return out;
}

// Word characters are letters, digits and underscore. ASCII is classified
// exactly; code points above U+007F count as word characters unless they
// fall in a known punctuation/symbol/separator block. The permissive
// default keeps letters of any script, including combining vowel signs of
// Indic scripts, inside tokens while splitting on punctuation, currency
// and math symbols, and emoji.
inline bool is_word_char(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') ||
           (cp >= '0' && cp <= '9') || cp == '_';
  }
  static constexpr std::pair<char32_t, char32_t> kNonWord[] = {
      {0x0080, 0x00BF},    // C1 controls, Latin-1 punctuation, NBSP
      {0x00D7, 0x00D7},    // multiplication sign
      {0x00F7, 0x00F7},    // division sign
      {0x1680, 0x1680},    // ogham space mark
      {0x180E, 0x180E},    // mongolian vowel separator
      {0x2000, 0x206F},    // general punctuation, all typographic spaces
      {0x20A0, 0x20CF},    // currency symbols
      {0x2190, 0x2BFF},    // arrows, math, technical, dingbats
      {0x2E00, 0x2E7F},    // supplemental punctuation
      {0x3000, 0x3003},    // CJK space and ideographic comma/full stop
      {0x3008, 0x3020},    // CJK brackets
      {0x3030, 0x303F},    // CJK marks
      {0xFE00, 0xFE0F},    // variation selectors (emoji presentation)
      {0xFE10, 0xFE6F},    // small/vertical form punctuation
      {0xFF01, 0xFF0F},    // fullwidth punctuation
      {0xFF1A, 0xFF20},    //
      {0xFF3B, 0xFF40},    //
      {0xFF5B, 0xFF65},    //
      {0xFFE0, 0xFFEE},    // fullwidth signs
      {0x1F000, 0x1FFFF},  // emoji and symbol planes
  };
  for (const auto& [lo, hi] : kNonWord) {
    if (cp >= lo && cp <= hi) return false;
  }
  return true;
}

// Simplified one-to-one lowercasing: ASCII, Latin-1, Latin Extended-A,
// Greek, Cyrillic and fullwidth Latin. Scripts without case (Tamil,
// Telugu, ...) pass through unchanged; multi-code-point lowerings are not
// performed.
inline char32_t to_lower(char32_t cp) {
  if (cp < 0x80) return (cp >= 'A' && cp <= 'Z') ? cp + 0x20 : cp;
  if (cp >= 0x00C0 && cp <= 0x00DE && cp != 0x00D7) return cp + 0x20;
  if (cp == 0x0130) return 0x0069;  // I with dot above -> plain i
  if (cp == 0x0178) return 0x00FF;  // Y with diaeresis
  if ((cp >= 0x0100 && cp <= 0x0137) || (cp >= 0x014A && cp <= 0x0177)) {
    return (cp % 2 == 0) ? cp + 1 : cp;
  }
  if ((cp >= 0x0139 && cp <= 0x0148) || (cp >= 0x0179 && cp <= 0x017E)) {
    return (cp % 2 == 1) ? cp + 1 : cp;
  }
  if (cp >= 0x0391 && cp <= 0x03AB && cp != 0x03A2) return cp + 0x20;
  if (cp >= 0x0400 && cp <= 0x040F) return cp + 0x50;
  if (cp >= 0x0410 && cp <= 0x042F) return cp + 0x20;
  if (cp >= 0xFF21 && cp <= 0xFF3A) return cp + 0x20;
  return cp;
}

inline std::string lower_copy(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) encode(to_lower(decode_next(s, i)), out);
  return out;
}

}  // namespace cmstress::utf8
