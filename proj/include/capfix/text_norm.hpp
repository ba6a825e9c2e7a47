#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include "capfix/error.hpp"

namespace capfix {

// ---------------------------------------------------------------------------
// UTF-8 helpers

namespace utf8 {

/// Decodes the code point at `pos` and advances it. Ill-formed sequences
/// decode to U+FFFD and consume one byte.
inline UChar32 next(std::string_view s, std::size_t& pos) {
  std::int32_t i = static_cast<std::int32_t>(pos);
  const auto len = static_cast<std::int32_t>(s.size());
  UChar32 c;
  U8_NEXT(reinterpret_cast<const std::uint8_t*>(s.data()), i, len, c);
  pos = static_cast<std::size_t>(i);
  return c < 0 ? 0xFFFD : c;
}

inline void append(std::string& out, UChar32 c) {
  char buf[U8_MAX_LENGTH];
  std::int32_t n = 0;
  U8_APPEND_UNSAFE(reinterpret_cast<std::uint8_t*>(buf), n, c);
  out.append(buf, static_cast<std::size_t>(n));
}

inline bool is_space(UChar32 c) { return u_isUWhiteSpace(c) != 0; }

/// Letters (L*) and numbers (N*).
inline bool is_alnum(UChar32 c) {
  return (U_GET_GC_MASK(c) & (U_GC_L_MASK | U_GC_N_MASK)) != 0;
}

}  // namespace utf8

/// Splits on runs of Unicode whitespace; never yields empty pieces.
inline std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> words;
  std::string cur;
  for (std::size_t pos = 0; pos < text.size();) {
    const std::size_t at = pos;
    const UChar32 c = utf8::next(text, pos);
    if (utf8::is_space(c)) {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.append(text.substr(at, pos - at));
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

inline std::string join(std::span<const std::string> words, std::string_view sep = " ") {
  std::string out;
  for (std::size_t k = 0; k < words.size(); ++k) {
    if (k) out.append(sep);
    out.append(words[k]);
  }
  return out;
}

/// Collapses whitespace runs to single spaces and trims both ends.
inline std::string normalize_whitespace(std::string_view text) {
  const auto words = split_whitespace(text);
  return join(words);
}

inline std::string to_lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t pos = 0; pos < s.size();) utf8::append(out, u_tolower(utf8::next(s, pos)));
  return out;
}

/// Keeps only letters and numbers; may return an empty string.
inline std::string strip_to_alnum(std::string_view s) {
  std::string out;
  for (std::size_t pos = 0; pos < s.size();) {
    const std::size_t at = pos;
    const UChar32 c = utf8::next(s, pos);
    if (utf8::is_alnum(c)) out.append(s.substr(at, pos - at));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Policies

enum class PolicyName { Wer, Bleu, Rouge, Custom };
enum class Punctuation { Attached, SeparateToken, Stripped };

/// How a metric turns caption text into tokens. Each metric binds its own
/// policy so the per-metric values in the worked fox example reproduce together:
/// WER and ROUGE need 9 punctuation-free reference tokens, BLEU needs the
/// final "." as a 10th token.
struct TokenPolicy {
  PolicyName name = PolicyName::Custom;
  bool lowercase = true;
  Punctuation punctuation = Punctuation::Stripped;

  friend bool operator==(const TokenPolicy&, const TokenPolicy&) = default;
};

inline constexpr TokenPolicy kWerPolicy{PolicyName::Wer, true, Punctuation::Stripped};
inline constexpr TokenPolicy kBleuPolicy{PolicyName::Bleu, true, Punctuation::SeparateToken};
inline constexpr TokenPolicy kRougePolicy{PolicyName::Rouge, true, Punctuation::Stripped};

constexpr std::string_view punctuation_name(Punctuation p) {
  switch (p) {
    case Punctuation::Attached: return "attached";
    case Punctuation::SeparateToken: return "separate";
    case Punctuation::Stripped: return "stripped";
  }
  return "?";
}

/// Parses "attached" | "separate" | "stripped" (the CLI spelling), optionally
/// suffixed with ":cased" to disable lowercasing.
inline TokenPolicy parse_policy(std::string_view text) {
  TokenPolicy p;
  if (const auto colon = text.find(':'); colon != std::string_view::npos) {
    if (text.substr(colon + 1) != "cased")
      throw std::invalid_argument("unknown policy modifier '" + std::string(text.substr(colon + 1)) + "'");
    p.lowercase = false;
    text = text.substr(0, colon);
  }
  if (text == "attached") p.punctuation = Punctuation::Attached;
  else if (text == "separate") p.punctuation = Punctuation::SeparateToken;
  else if (text == "stripped") p.punctuation = Punctuation::Stripped;
  else throw std::invalid_argument("unknown punctuation policy '" + std::string(text) + "'");
  return p;
}

struct TokenStream {
  std::vector<std::string> tokens;
  TokenPolicy policy;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }
  std::span<const std::string> view() const noexcept { return tokens; }
  const std::string& operator[](std::size_t k) const { return tokens[k]; }
};

namespace detail {

inline bool is_ascii_punct(unsigned char c) {
  return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
         (c >= 0x7B && c <= 0x7E);
}

// Leading and trailing ASCII punctuation become one token per character.
inline void split_edge_punctuation(const std::string& word, std::vector<std::string>& out) {
  std::size_t first = 0;
  while (first < word.size() && is_ascii_punct(static_cast<unsigned char>(word[first]))) ++first;
  std::size_t last = word.size();
  while (last > first && is_ascii_punct(static_cast<unsigned char>(word[last - 1]))) --last;
  for (std::size_t k = 0; k < first; ++k) out.emplace_back(1, word[k]);
  if (last > first) out.push_back(word.substr(first, last - first));
  for (std::size_t k = last; k < word.size(); ++k) out.emplace_back(1, word[k]);
}

}  // namespace detail

inline TokenStream tokenize(std::string_view text, const TokenPolicy& policy) {
  TokenStream ts{{}, policy};
  for (auto& raw : split_whitespace(text)) {
    std::string word = policy.lowercase ? to_lower(raw) : std::move(raw);
    switch (policy.punctuation) {
      case Punctuation::Attached:
        ts.tokens.push_back(std::move(word));
        break;
      case Punctuation::Stripped:
        if (auto s = strip_to_alnum(word); !s.empty()) ts.tokens.push_back(std::move(s));
        break;
      case Punctuation::SeparateToken:
        detail::split_edge_punctuation(word, ts.tokens);
        break;
    }
  }
  return ts;
}

// ---------------------------------------------------------------------------
// N-grams

using NGram = std::vector<std::string>;

struct NGramBag {
  std::size_t n = 1;
  std::map<NGram, std::size_t> counts;

  std::size_t total() const noexcept {
    std::size_t sum = 0;
    for (const auto& [_, c] : counts) sum += c;
    return sum;
  }
  std::size_t count(const NGram& g) const {
    const auto it = counts.find(g);
    return it == counts.end() ? 0 : it->second;
  }
};

inline NGramBag ngrams(std::span<const std::string> tokens, std::size_t n) {
  if (n < 1) throw Error(Errc::InvalidOrder, "n-gram order must be >= 1");
  NGramBag bag{n, {}};
  for (std::size_t k = 0; k + n <= tokens.size(); ++k)
    ++bag.counts[NGram(tokens.begin() + static_cast<std::ptrdiff_t>(k),
                       tokens.begin() + static_cast<std::ptrdiff_t>(k + n))];
  return bag;
}

inline NGramBag ngrams(const TokenStream& ts, std::size_t n) { return ngrams(ts.view(), n); }

/// Sum over shared n-grams of min(count in a, count in b).
inline std::size_t clipped_overlap(const NGramBag& a, const NGramBag& b) {
  std::size_t shared = 0;
  auto ia = a.counts.begin();
  auto ib = b.counts.begin();
  while (ia != a.counts.end() && ib != b.counts.end()) {
    if (ia->first < ib->first) ++ia;
    else if (ib->first < ia->first) ++ib;
    else {
      shared += std::min(ia->second, ib->second);
      ++ia;
      ++ib;
    }
  }
  return shared;
}

}  // namespace capfix
