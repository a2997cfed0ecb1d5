#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "arbitrage/errors.hpp"
#include "arbitrage/unicode.hpp"

namespace arbitrage::metrics {

struct SentenceRange {
  std::size_t begin = 0;  // token index, inclusive
  std::size_t end = 0;    // token index, exclusive
};

struct TokenizedText {
  std::vector<std::string> tokens;
  std::vector<SentenceRange> sentences;
};

struct TextMetrics {
  std::size_t n_tokens = 0;
  double gunning_fog = 0.0;
  double rix = 0.0;
  double mtld = 0.0;
};

// Word tokens are maximal runs of letters/digits/apostrophes (combining marks
// stay attached); every Han character is its own token. Sentences end at a
// terminator (. ! ? … 。 ！ ？) followed by whitespace or end of text; a
// trailing unterminated run of tokens counts as one sentence. Texts with no
// word tokens are rejected.
[[nodiscard]] inline TokenizedText tokenize(std::string_view text,
                                            std::string_view /*language*/ = {}) {
  TokenizedText out;
  std::string current;
  std::size_t sentence_start = 0;

  auto flush_token = [&] {
    if (!current.empty()) {
      out.tokens.push_back(current);
      current.clear();
    }
  };
  auto flush_sentence = [&] {
    if (out.tokens.size() > sentence_start) {
      out.sentences.push_back({sentence_start, out.tokens.size()});
      sentence_start = out.tokens.size();
    }
  };

  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t cp_start = i;
    const char32_t cp = uni::decode(text, i);
    if (uni::is_han(cp)) {
      flush_token();
      out.tokens.emplace_back(text.substr(cp_start, i - cp_start));
      continue;
    }
    if (uni::is_letter(cp) || uni::is_digit(cp) || uni::is_apostrophe(cp)) {
      current.append(text.substr(cp_start, i - cp_start));
      continue;
    }
    if (uni::is_mark(cp) && !current.empty()) {
      current.append(text.substr(cp_start, i - cp_start));
      continue;
    }
    flush_token();
    if (uni::is_sentence_terminator(cp)) {
      std::size_t peek = i;
      const bool at_end = peek >= text.size();
      if (at_end || uni::is_space(uni::decode(text, peek))) flush_sentence();
    }
  }
  flush_token();
  flush_sentence();

  if (out.tokens.empty()) {
    throw MetricsError("text has no word tokens");
  }
  return out;
}

// Latin words: count of maximal vowel groups (a e i o u y and diacritic
// forms), minimum 1. Words with no Latin letters: ceil(length/3) as a crude
// cross-script proxy, minimum 1. Length is in Unicode scalars.
[[nodiscard]] inline std::size_t syllable_estimate(std::string_view word) {
  const std::vector<char32_t> cps = uni::decode_all(word);
  bool has_latin = false;
  for (char32_t cp : cps) {
    if (uni::is_latin_letter(cp)) {
      has_latin = true;
      break;
    }
  }
  if (!has_latin) {
    const std::size_t n = (cps.size() + 2) / 3;
    return n == 0 ? 1 : n;
  }
  std::size_t groups = 0;
  bool in_group = false;
  for (char32_t cp : cps) {
    const bool vowel = uni::is_latin_vowel(cp);
    if (vowel && !in_group) ++groups;
    in_group = vowel;
  }
  return groups == 0 ? 1 : groups;
}

[[nodiscard]] inline double gunning_fog(const TokenizedText& tok) {
  if (tok.tokens.empty() || tok.sentences.empty()) {
    throw MetricsError("gunning_fog needs at least one token and one sentence");
  }
  std::size_t complex_words = 0;
  for (const auto& t : tok.tokens) {
    if (syllable_estimate(t) >= 3) ++complex_words;
  }
  const double n_tokens = static_cast<double>(tok.tokens.size());
  const double n_sentences = static_cast<double>(tok.sentences.size());
  const double raw =
      0.4 * (n_tokens / n_sentences + 100.0 * static_cast<double>(complex_words) / n_tokens);
  return std::clamp(raw, 0.0, 20.0);
}

[[nodiscard]] inline double rix(const TokenizedText& tok) {
  if (tok.sentences.empty()) {
    throw MetricsError("rix needs at least one sentence");
  }
  std::size_t long_words = 0;
  for (const auto& t : tok.tokens) {
    if (uni::scalar_count(t) > 6) ++long_words;
  }
  return static_cast<double>(long_words) / static_cast<double>(tok.sentences.size());
}

[[nodiscard]] inline double ttr(const std::vector<std::string>& tokens) {
  if (tokens.empty()) throw MetricsError("ttr of an empty token list");
  std::unordered_set<std::string> types;
  for (const auto& t : tokens) types.insert(uni::fold_utf8(t));
  return static_cast<double>(types.size()) / static_cast<double>(tokens.size());
}

namespace detail {

// One directional MTLD pass over case-folded tokens. factors == 0 means the
// running TTR never crossed the threshold and the partial factor was zero;
// the caller maps that degenerate case to N.
inline double mtld_directional(const std::vector<std::string>& folded,
                               double threshold) {
  double factors = 0.0;
  std::unordered_set<std::string> types;
  std::size_t segment_len = 0;
  for (const auto& t : folded) {
    types.insert(t);
    ++segment_len;
    const double running =
        static_cast<double>(types.size()) / static_cast<double>(segment_len);
    if (running <= threshold) {
      factors += 1.0;
      types.clear();
      segment_len = 0;
    }
  }
  if (segment_len > 0) {
    const double running =
        static_cast<double>(types.size()) / static_cast<double>(segment_len);
    factors += (1.0 - running) / (1.0 - threshold);
  }
  const double n = static_cast<double>(folded.size());
  if (factors == 0.0) return n;
  return n / factors;
}

}  // namespace detail

[[nodiscard]] inline double mtld(const std::vector<std::string>& tokens,
                                 double threshold = 0.72) {
  if (tokens.empty()) throw MetricsError("mtld of an empty token list");
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw MetricsError("mtld threshold must be in (0,1)");
  }
  std::vector<std::string> folded;
  folded.reserve(tokens.size());
  for (const auto& t : tokens) folded.push_back(uni::fold_utf8(t));

  const double forward = detail::mtld_directional(folded, threshold);
  std::reverse(folded.begin(), folded.end());
  const double backward = detail::mtld_directional(folded, threshold);
  return 0.5 * (forward + backward);
}

[[nodiscard]] inline TextMetrics compute_metrics(std::string_view text,
                                                 std::string_view language = {},
                                                 double mtld_threshold = 0.72) {
  const TokenizedText tok = tokenize(text, language);
  TextMetrics m;
  m.n_tokens = tok.tokens.size();
  m.gunning_fog = gunning_fog(tok);
  m.rix = rix(tok);
  m.mtld = mtld(tok.tokens, mtld_threshold);
  return m;
}

}  // namespace arbitrage::metrics
