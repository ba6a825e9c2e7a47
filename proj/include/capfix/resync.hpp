#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "capfix/alignment.hpp"
#include "capfix/error.hpp"
#include "capfix/subtitle_io.hpp"
#include "capfix/text_norm.hpp"

namespace capfix {

/// Half-open range [first, last) of corrected-token indices per original cue.
struct CueMap {
  std::vector<std::pair<std::size_t, std::size_t>> assignments;
};

namespace detail {

// Case-preserving, punctuation-stripped key. May be empty for tokens made of
// punctuation only; those still take part in the alignment.
inline std::vector<std::string> resync_keys(std::span<const std::string> words) {
  std::vector<std::string> keys;
  keys.reserve(words.size());
  for (const auto& w : words) keys.push_back(strip_to_alnum(w));
  return keys;
}

}  // namespace detail

/// Assigns every corrected token to an original cue. Tokens aligned to an
/// original token (match or substitution) take its cue; inserted tokens
/// take the cue of the nearest preceding aligned token, or the first cue.
inline CueMap map_cues(const Transcript& original, std::span<const std::string> corrected_words) {
  std::vector<std::string> orig_words;
  std::vector<std::size_t> orig_cue;
  for (std::size_t c = 0; c < original.cues.size(); ++c)
    for (auto& w : split_whitespace(original.cues[c].text)) {
      orig_words.push_back(std::move(w));
      orig_cue.push_back(c);
    }

  const auto ref_keys = detail::resync_keys(orig_words);
  const auto hyp_keys = detail::resync_keys(corrected_words);
  const auto alignment = align(std::span<const std::string>(ref_keys), std::span<const std::string>(hyp_keys));

  std::vector<std::size_t> owner(corrected_words.size(), 0);
  std::size_t current = 0;
  for (const auto& step : alignment.path) {
    if (step.op == EditOp::Delete) continue;
    if (step.op != EditOp::Insert) current = orig_cue[step.ref];
    owner[step.hyp] = current;
  }

  // The path is monotone, so owners are non-decreasing and each cue's
  // tokens form one contiguous run.
  CueMap map;
  map.assignments.resize(original.cues.size());
  std::size_t pos = 0;
  for (std::size_t c = 0; c < original.cues.size(); ++c) {
    const std::size_t first = pos;
    while (pos < owner.size() && owner[pos] == c) ++pos;
    map.assignments[c] = {first, pos};
  }
  return map;
}

/// Re-segments corrected flat text onto the original cues. Cue count and
/// timings are kept exactly; cue text is taken verbatim from the corrected
/// tokens, and a cue that receives no tokens keeps its timing with empty text.
inline Transcript realign(const Transcript& original, std::string_view corrected_text) {
  if (flatten(original).empty()) throw Error(Errc::EmptyOriginal, "original transcript has no words");
  const auto words = split_whitespace(corrected_text);
  if (words.empty()) throw Error(Errc::EmptyCorrection, "corrected text is empty");

  const auto map = map_cues(original, words);
  Transcript out = original;
  for (std::size_t c = 0; c < out.cues.size(); ++c) {
    const auto [first, last] = map.assignments[c];
    out.cues[c].text = join(std::span<const std::string>(words).subspan(first, last - first));
  }
  return out;
}

}  // namespace capfix
