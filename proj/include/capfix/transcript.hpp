#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "capfix/error.hpp"

namespace capfix {

/// Milliseconds from media start.
using Millis = std::int64_t;

enum class SourceFormat { Srt, Vtt, YtJson, Plain };

constexpr std::string_view source_format_name(SourceFormat f) {
  switch (f) {
    case SourceFormat::Srt: return "srt";
    case SourceFormat::Vtt: return "vtt";
    case SourceFormat::YtJson: return "ytjson";
    case SourceFormat::Plain: return "txt";
  }
  return "?";
}

/// One timed caption unit. `index` is the 1-based ordinal within its
/// transcript; `text` may hold internal '\n' line breaks.
struct Cue {
  std::size_t index = 0;
  Millis start = 0;
  Millis end = 0;
  std::string text;

  friend bool operator==(const Cue&, const Cue&) = default;
};

struct Transcript {
  std::vector<Cue> cues;
  SourceFormat source_format = SourceFormat::Plain;

  bool empty() const noexcept { return cues.empty(); }
  std::size_t size() const noexcept { return cues.size(); }

  // Source format is provenance, not content.
  friend bool operator==(const Transcript& a, const Transcript& b) { return a.cues == b.cues; }
};

/// Checks the model invariants: indices 1..n, start <= end, non-decreasing
/// starts. Throws Error(InvalidTranscript).
inline void validate(const Transcript& t) {
  Millis prev_start = 0;
  for (std::size_t k = 0; k < t.cues.size(); ++k) {
    const Cue& c = t.cues[k];
    const std::string where = "cue " + std::to_string(k + 1);
    if (c.index != k + 1)
      throw Error(Errc::InvalidTranscript, where + ": index " + std::to_string(c.index) + " is not ordinal");
    if (c.start < 0 || c.end < c.start)
      throw Error(Errc::InvalidTranscript, where + ": invalid time range");
    if (k > 0 && c.start < prev_start)
      throw Error(Errc::InvalidTranscript, where + ": start precedes previous cue");
    prev_start = c.start;
  }
}

}  // namespace capfix
