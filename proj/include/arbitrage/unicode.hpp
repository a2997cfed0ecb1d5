#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Minimal UTF-8 / codepoint utilities: just enough character knowledge for
// tokenization, case-folded comparisons, and vowel-group counting across the
// scripts this toolkit meets (Latin incl. extensions, Cyrillic, Greek,
// Arabic, Hebrew, Han, Kana, Hangul, and a few more). Input is assumed to be
// NFC-normalized UTF-8; malformed bytes decode as U+FFFD.

namespace arbitrage::uni {

inline constexpr char32_t kReplacement = 0xFFFD;

// Decodes one codepoint starting at `i`; advances `i` past it.
inline char32_t decode(std::string_view s, std::size_t& i) {
  const auto byte = [&](std::size_t k) -> std::uint32_t {
    return static_cast<unsigned char>(s[k]);
  };
  const std::uint32_t b0 = byte(i);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  auto cont = [&](std::size_t k) {
    return k < s.size() && (byte(k) & 0xC0) == 0x80;
  };
  if ((b0 & 0xE0) == 0xC0 && cont(i + 1)) {
    const char32_t cp = ((b0 & 0x1F) << 6) | (byte(i + 1) & 0x3F);
    i += 2;
    return cp < 0x80 ? kReplacement : cp;
  }
  if ((b0 & 0xF0) == 0xE0 && cont(i + 1) && cont(i + 2)) {
    const char32_t cp =
        ((b0 & 0x0F) << 12) | ((byte(i + 1) & 0x3F) << 6) | (byte(i + 2) & 0x3F);
    i += 3;
    return cp < 0x800 ? kReplacement : cp;
  }
  if ((b0 & 0xF8) == 0xF0 && cont(i + 1) && cont(i + 2) && cont(i + 3)) {
    const char32_t cp = ((b0 & 0x07) << 18) | ((byte(i + 1) & 0x3F) << 12) |
                        ((byte(i + 2) & 0x3F) << 6) | (byte(i + 3) & 0x3F);
    i += 4;
    return (cp < 0x10000 || cp > 0x10FFFF) ? kReplacement : cp;
  }
  ++i;
  return kReplacement;
}

inline void encode(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

[[nodiscard]] inline std::vector<char32_t> decode_all(std::string_view s) {
  std::vector<char32_t> cps;
  cps.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) cps.push_back(decode(s, i));
  return cps;
}

[[nodiscard]] inline std::size_t scalar_count(std::string_view s) {
  std::size_t i = 0, n = 0;
  while (i < s.size()) {
    decode(s, i);
    ++n;
  }
  return n;
}

[[nodiscard]] constexpr bool in(char32_t cp, char32_t lo, char32_t hi) {
  return cp >= lo && cp <= hi;
}

[[nodiscard]] constexpr bool is_han(char32_t cp) {
  return in(cp, 0x4E00, 0x9FFF) || in(cp, 0x3400, 0x4DBF) || in(cp, 0xF900, 0xFAFF);
}

[[nodiscard]] constexpr bool is_latin_letter(char32_t cp) {
  return in(cp, 'A', 'Z') || in(cp, 'a', 'z') ||
         (in(cp, 0xC0, 0x24F) && cp != 0xD7 && cp != 0xF7) ||  // Latin-1 + Ext-A/B
         in(cp, 0x1E00, 0x1EFF);                               // Latin Ext Additional
}

[[nodiscard]] constexpr bool is_letter(char32_t cp) {
  if (cp < 0x80) return in(cp, 'A', 'Z') || in(cp, 'a', 'z');
  return is_latin_letter(cp) ||
         in(cp, 0x370, 0x3FF) || in(cp, 0x1F00, 0x1FFF) ||   // Greek
         in(cp, 0x400, 0x4FF) || in(cp, 0x500, 0x52F) ||     // Cyrillic
         in(cp, 0x531, 0x58F) ||                             // Armenian
         in(cp, 0x5D0, 0x5EA) || in(cp, 0x5F0, 0x5F2) ||     // Hebrew
         in(cp, 0x620, 0x64A) || in(cp, 0x66E, 0x6D3) ||     // Arabic
         in(cp, 0x6FA, 0x6FF) || in(cp, 0x750, 0x77F) ||
         in(cp, 0x900, 0x97F) || in(cp, 0x980, 0x9FF) ||     // Devanagari, Bengali
         in(cp, 0xE01, 0xE5B) ||                             // Thai
         in(cp, 0x10A0, 0x10FF) ||                           // Georgian
         is_han(cp) ||
         in(cp, 0x3040, 0x309F) || in(cp, 0x30A0, 0x30FF) ||  // Kana
         in(cp, 0xAC00, 0xD7A3) || in(cp, 0x1100, 0x11FF);    // Hangul
}

// Combining marks kept inside word tokens (accents, harakat).
[[nodiscard]] constexpr bool is_mark(char32_t cp) {
  return in(cp, 0x300, 0x36F) || in(cp, 0x64B, 0x65F) || cp == 0x670;
}

[[nodiscard]] constexpr bool is_digit(char32_t cp) {
  return in(cp, '0', '9') || in(cp, 0x660, 0x669) || in(cp, 0x6F0, 0x6F9);
}

[[nodiscard]] constexpr bool is_apostrophe(char32_t cp) {
  return cp == 0x27 || cp == 0x2019 || cp == 0x2BC;
}

[[nodiscard]] constexpr bool is_space(char32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\r' || cp == '\n' || cp == 0xA0 ||
         cp == 0x3000;
}

// Sentence terminators; a boundary requires the terminator to be followed by
// whitespace or end of text (so "3.14" never splits).
[[nodiscard]] constexpr bool is_sentence_terminator(char32_t cp) {
  return cp == '.' || cp == '!' || cp == '?' || cp == 0x2026 ||  // …
         cp == 0x3002 || cp == 0xFF01 || cp == 0xFF1F;           // 。！？
}

// Simple case fold covering ASCII, Latin-1, Latin Ext-A, Greek, and the
// Cyrillic block. Codepoints outside these tables fold to themselves.
[[nodiscard]] constexpr char32_t fold(char32_t cp) {
  if (in(cp, 'A', 'Z')) return cp + 0x20;
  if (in(cp, 0xC0, 0xDE) && cp != 0xD7) return cp + 0x20;
  if (in(cp, 0x100, 0x137) && cp != 0x130 && cp != 0x131) {
    return (cp % 2 == 0) ? cp + 1 : cp;
  }
  if (in(cp, 0x139, 0x148)) return (cp % 2 == 1) ? cp + 1 : cp;
  if (in(cp, 0x14A, 0x177)) return (cp % 2 == 0) ? cp + 1 : cp;
  if (cp == 0x178) return 0xFF;  // Ÿ -> ÿ
  if (in(cp, 0x179, 0x17E)) return (cp % 2 == 1) ? cp + 1 : cp;
  if (in(cp, 0x391, 0x3A9) && cp != 0x3A2) return cp + 0x20;
  if (cp == 0x3C2) return 0x3C3;  // final sigma
  if (in(cp, 0x410, 0x42F)) return cp + 0x20;
  if (in(cp, 0x400, 0x40F)) return cp + 0x50;
  return cp;
}

[[nodiscard]] inline std::string fold_utf8(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) encode(fold(decode(s, i)), out);
  return out;
}

// Vowels for syllable estimation: a e i o u y plus their common Latin
// diacritic forms (folded or not).
[[nodiscard]] constexpr bool is_latin_vowel(char32_t cp) {
  const char32_t f = fold(cp);
  switch (f) {
    case 'a': case 'e': case 'i': case 'o': case 'u': case 'y':
      return true;
    default:
      break;
  }
  return in(f, 0xE0, 0xE6) ||             // à-æ
         in(f, 0xE8, 0xEF) ||             // è-ï
         in(f, 0xF2, 0xF6) ||             // ò-ö
         in(f, 0xF8, 0xFC) ||             // ø-ü
         f == 0xFD || f == 0xFF ||        // ý ÿ
         in(f, 0x101, 0x105) ||           // ā ă ą
         in(f, 0x113, 0x11B) ||           // ē ĕ ė ę ě
         in(f, 0x129, 0x131) ||           // ĩ ī ĭ į ı
         f == 0x153 ||                    // œ
         in(f, 0x14D, 0x151) ||           // ō ŏ ő
         in(f, 0x169, 0x173) ||           // ũ ū ŭ ů ű ų
         f == 0x177;                      // ŷ
}

}  // namespace arbitrage::uni
