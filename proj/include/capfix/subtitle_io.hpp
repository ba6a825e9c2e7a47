#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "capfix/error.hpp"
#include "capfix/text_norm.hpp"
#include "capfix/transcript.hpp"

namespace capfix {

namespace detail {

inline std::string_view strip_bom(std::string_view data) {
  if (data.size() >= 3 && data.substr(0, 3) == "\xEF\xBB\xBF") data.remove_prefix(3);
  return data;
}

/// Splits on LF, CRLF or lone CR.
inline std::vector<std::string_view> split_lines(std::string_view data) {
  std::vector<std::string_view> lines;
  std::size_t begin = 0;
  for (std::size_t k = 0; k < data.size(); ++k) {
    if (data[k] == '\n' || data[k] == '\r') {
      lines.push_back(data.substr(begin, k - begin));
      if (data[k] == '\r' && k + 1 < data.size() && data[k + 1] == '\n') ++k;
      begin = k + 1;
    }
  }
  if (begin < data.size()) lines.push_back(data.substr(begin));
  return lines;
}

inline std::string_view trim(std::string_view s) {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\f' || c == '\v'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

inline bool is_blank(std::string_view s) { return trim(s).empty(); }

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

inline std::int64_t to_int(std::string_view s) {
  std::int64_t v = 0;
  for (char c : s) v = v * 10 + (c - '0');
  return v;
}

/// Parses "[H+:]MM:SS<sep>mmm". Hours are mandatory when `hours_required`.
inline std::optional<Millis> parse_clock(std::string_view s, char sep, bool hours_required) {
  const auto frac = s.rfind(sep);
  if (frac == std::string_view::npos) return std::nullopt;
  const auto ms = s.substr(frac + 1);
  if (ms.size() != 3 || !all_digits(ms)) return std::nullopt;
  std::vector<std::string_view> fields;
  std::string_view rest = s.substr(0, frac);
  for (std::size_t colon; (colon = rest.find(':')) != std::string_view::npos;) {
    fields.push_back(rest.substr(0, colon));
    rest.remove_prefix(colon + 1);
  }
  fields.push_back(rest);
  if (fields.size() != 3 && (hours_required || fields.size() != 2)) return std::nullopt;
  std::int64_t hours = 0;
  if (fields.size() == 3) {
    if (!all_digits(fields[0]) || fields[0].size() > 9) return std::nullopt;
    hours = to_int(fields[0]);
  }
  const auto mm = fields[fields.size() - 2];
  const auto ss = fields[fields.size() - 1];
  if (mm.size() != 2 || ss.size() != 2 || !all_digits(mm) || !all_digits(ss)) return std::nullopt;
  const auto minutes = to_int(mm);
  const auto seconds = to_int(ss);
  if (minutes > 59 || seconds > 59) return std::nullopt;
  return ((hours * 60 + minutes) * 60 + seconds) * 1000 + to_int(ms);
}

struct Timing {
  Millis start;
  Millis end;
};

// "<start> --> <end>[ settings]"; anything after the end stamp is discarded.
inline Timing parse_timing_line(std::string_view line, std::size_t line_no, char sep, bool hours_required) {
  const auto arrow = line.find("-->");
  if (arrow == std::string_view::npos)
    throw Error(Errc::MalformedTimestamp, "line " + std::to_string(line_no) + ": expected '-->' in '" +
                                              std::string(line) + "'",
                line_no);
  const auto lhs = trim(line.substr(0, arrow));
  auto rhs = trim(line.substr(arrow + 3));
  if (const auto sp = rhs.find_first_of(" \t"); sp != std::string_view::npos) rhs = rhs.substr(0, sp);
  const auto bad = [&](std::string_view tok) {
    return Error(Errc::MalformedTimestamp,
                 "line " + std::to_string(line_no) + ": bad timestamp '" + std::string(tok) + "'", line_no);
  };
  const auto start = parse_clock(lhs, sep, hours_required);
  if (!start) throw bad(lhs);
  const auto end = parse_clock(rhs, sep, hours_required);
  if (!end) throw bad(rhs);
  if (*end < *start)
    throw Error(Errc::MalformedTimestamp,
                "line " + std::to_string(line_no) + ": end '" + std::string(rhs) + "' precedes start", line_no);
  return {*start, *end};
}

inline void check_start_order(const Transcript& t, Millis start, std::size_t line_no) {
  if (!t.cues.empty() && start < t.cues.back().start)
    throw Error(Errc::NonMonotonicTime,
                "line " + std::to_string(line_no) + ": cue starts before the previous cue", line_no);
}

inline std::string join_text_lines(const std::vector<std::string>& lines) {
  std::string text;
  for (const auto& l : lines) {
    const auto t = trim(l);
    if (t.empty()) continue;
    if (!text.empty()) text += '\n';
    text.append(t);
  }
  return text;
}

inline void append_entity(std::string& out, std::string_view name) {
  if (name == "amp") out += '&';
  else if (name == "lt") out += '<';
  else if (name == "gt") out += '>';
  else if (name == "quot") out += '"';
  else if (name == "apos") out += '\'';
  else if (name == "nbsp") out += ' ';
  else if (name == "lrm" || name == "rlm") {
  } else if (name.size() > 1 && name[0] == '#') {
    const bool hex = name[1] == 'x' || name[1] == 'X';
    const auto digits = name.substr(hex ? 2 : 1);
    UChar32 cp = 0;
    for (char c : digits) {
      const int v = (c >= '0' && c <= '9') ? c - '0'
                    : (hex && c >= 'a' && c <= 'f') ? c - 'a' + 10
                    : (hex && c >= 'A' && c <= 'F') ? c - 'A' + 10
                                                    : -1;
      if (v < 0 || cp > 0x10FFFF) return;
      cp = cp * (hex ? 16 : 10) + v;
    }
    if (!digits.empty() && cp <= 0x10FFFF) utf8::append(out, cp);
  } else {
    out += '&';
    out.append(name);
    out += ';';
  }
}

/// Removes <...> markup and decodes the character references VTT allows.
inline std::string strip_vtt_markup(std::string_view line) {
  std::string out;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (c == '<') {
      const auto close = line.find('>', k);
      if (close == std::string_view::npos) break;
      k = close;
    } else if (c == '&') {
      const auto semi = line.find(';', k);
      if (semi == std::string_view::npos || semi - k > 10) {
        out += c;
        continue;
      }
      append_entity(out, line.substr(k + 1, semi - k - 1));
      k = semi;
    } else {
      out += c;
    }
  }
  return out;
}

inline std::string format_clock(Millis ms, char sep) {
  const auto h = ms / 3'600'000;
  const auto m = (ms / 60'000) % 60;
  const auto s = (ms / 1000) % 60;
  const auto f = ms % 1000;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld%c%03lld", static_cast<long long>(h),
                static_cast<long long>(m), static_cast<long long>(s), sep, static_cast<long long>(f));
  return buf;
}

}  // namespace detail

/// SRT: numbered blocks of "index / HH:MM:SS,mmm --> HH:MM:SS,mmm / text".
/// Input indices must strictly increase; cues are renumbered 1..n.
inline Transcript parse_srt(std::string_view data) {
  const auto lines = detail::split_lines(detail::strip_bom(data));
  Transcript t{{}, SourceFormat::Srt};
  std::size_t i = 0;
  const auto skip_blank = [&] {
    while (i < lines.size() && detail::is_blank(lines[i])) ++i;
  };
  skip_blank();
  if (i == lines.size()) throw Error(Errc::EmptyInput, "no subtitle blocks");

  std::int64_t prev_index = 0;
  while (i < lines.size()) {
    const auto index_line = detail::trim(lines[i]);
    const std::size_t line_no = i + 1;
    if (!detail::all_digits(index_line) || index_line.size() > 15)
      throw Error(Errc::MalformedIndex,
                  "line " + std::to_string(line_no) + ": bad cue index '" + std::string(index_line) + "'", line_no);
    const auto index = detail::to_int(index_line);
    if (!t.cues.empty() && index <= prev_index)
      throw Error(Errc::NonMonotonicIndex,
                  "line " + std::to_string(line_no) + ": index " + std::to_string(index) + " after " +
                      std::to_string(prev_index),
                  line_no);
    prev_index = index;
    if (++i == lines.size())
      throw Error(Errc::MalformedTimestamp, "line " + std::to_string(i + 1) + ": missing timing line", i + 1);
    const auto timing = detail::parse_timing_line(detail::trim(lines[i]), i + 1, ',', true);
    detail::check_start_order(t, timing.start, i + 1);
    ++i;
    std::vector<std::string> text_lines;
    while (i < lines.size() && !detail::is_blank(lines[i])) text_lines.emplace_back(lines[i++]);
    t.cues.push_back({t.cues.size() + 1, timing.start, timing.end, detail::join_text_lines(text_lines)});
    skip_blank();
  }
  return t;
}

/// WebVTT: mandatory "WEBVTT" header; NOTE/STYLE/REGION blocks and cue
/// settings are dropped, inline markup is stripped to plain text.
inline Transcript parse_vtt(std::string_view data) {
  const auto lines = detail::split_lines(detail::strip_bom(data));
  const auto header_ok = [&] {
    if (lines.empty() || !lines[0].starts_with("WEBVTT")) return false;
    const auto rest = lines[0].substr(6);
    return rest.empty() || rest[0] == ' ' || rest[0] == '\t';
  };
  if (!header_ok()) throw Error(Errc::MissingHeader, "first line must be 'WEBVTT'", 1);

  Transcript t{{}, SourceFormat::Vtt};
  std::size_t i = 1;
  while (i < lines.size() && !detail::is_blank(lines[i])) ++i;  // header block

  const auto starts_block = [](std::string_view line, std::string_view kw) {
    return line.starts_with(kw) && (line.size() == kw.size() || line[kw.size()] == ' ' || line[kw.size()] == '\t');
  };
  while (i < lines.size()) {
    if (detail::is_blank(lines[i])) {
      ++i;
      continue;
    }
    const std::size_t block_begin = i;
    while (i < lines.size() && !detail::is_blank(lines[i])) ++i;
    const std::size_t block_end = i;
    const auto first = lines[block_begin];
    if (starts_block(first, "NOTE") || starts_block(first, "STYLE") || starts_block(first, "REGION")) continue;

    std::size_t timing_at = block_begin;
    if (first.find("-->") == std::string_view::npos) timing_at = block_begin + 1;  // cue identifier
    if (timing_at >= block_end)
      throw Error(Errc::MalformedTimestamp,
                  "line " + std::to_string(block_begin + 1) + ": cue block without a timing line", block_begin + 1);
    const auto timing = detail::parse_timing_line(detail::trim(lines[timing_at]), timing_at + 1, '.', false);
    detail::check_start_order(t, timing.start, timing_at + 1);
    std::vector<std::string> text_lines;
    for (std::size_t k = timing_at + 1; k < block_end; ++k) text_lines.push_back(detail::strip_vtt_markup(lines[k]));
    t.cues.push_back({t.cues.size() + 1, timing.start, timing.end, detail::join_text_lines(text_lines)});
  }
  return t;
}

/// Seconds to milliseconds, rounding half-up. Values within 1e-6 ms of a
/// half are treated as exact halves to absorb binary representation error.
inline Millis seconds_to_millis(double seconds) {
  const double ms = seconds * 1000.0;
  const double floor_ms = std::floor(ms);
  const double frac = ms - floor_ms;
  if (std::abs(frac - 0.5) < 1e-6) return static_cast<Millis>(floor_ms) + 1;
  return static_cast<Millis>(std::llround(ms));
}

/// The array of {text, start, duration} objects emitted by YouTube
/// transcript fetchers; times are decimal seconds.
inline Transcript parse_youtube_json(std::string_view data) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(detail::strip_bom(data));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::MalformedJson, e.what());
  }
  if (!doc.is_array()) throw Error(Errc::MalformedJson, "top-level value must be an array");

  Transcript t{{}, SourceFormat::YtJson};
  for (std::size_t k = 0; k < doc.size(); ++k) {
    const auto& entry = doc[k];
    const std::string where = "entry " + std::to_string(k);
    if (!entry.is_object()) throw Error(Errc::MalformedJson, where + " is not an object");
    for (const char* field : {"text", "start", "duration"})
      if (!entry.contains(field)) throw Error(Errc::MissingField, field);
    if (!entry["text"].is_string()) throw Error(Errc::MalformedJson, where + ": 'text' is not a string");
    if (!entry["start"].is_number() || !entry["duration"].is_number())
      throw Error(Errc::MalformedJson, where + ": 'start' and 'duration' must be numbers");
    const double start = entry["start"].get<double>();
    const double duration = entry["duration"].get<double>();
    if (!(start >= 0.0) || !(duration >= 0.0) || !std::isfinite(start + duration))
      throw Error(Errc::MalformedJson, where + ": negative or non-finite time");
    const Millis start_ms = seconds_to_millis(start);
    const Millis end_ms = seconds_to_millis(start + duration);
    if (!t.cues.empty() && start_ms < t.cues.back().start)
      throw Error(Errc::NonMonotonicTime, where + " starts before the previous entry");
    std::vector<std::string> text_lines;
    for (auto line : detail::split_lines(entry["text"].get_ref<const std::string&>())) text_lines.emplace_back(line);
    t.cues.push_back({t.cues.size() + 1, start_ms, std::max(start_ms, end_ms), detail::join_text_lines(text_lines)});
  }
  return t;
}

inline Transcript parse_transcript(std::string_view data, SourceFormat format) {
  switch (format) {
    case SourceFormat::Srt: return parse_srt(data);
    case SourceFormat::Vtt: return parse_vtt(data);
    case SourceFormat::YtJson: return parse_youtube_json(data);
    case SourceFormat::Plain: break;
  }
  const auto text = normalize_whitespace(data);
  Transcript t{{}, SourceFormat::Plain};
  if (!text.empty()) t.cues.push_back({1, 0, 0, text});
  return t;
}

/// Canonical SRT: LF line ends, cues renumbered 1..n, one blank line after
/// each block. Blank lines inside cue text are dropped.
inline std::string serialize_srt(const Transcript& t) {
  validate(t);
  std::string out;
  for (std::size_t k = 0; k < t.cues.size(); ++k) {
    const Cue& c = t.cues[k];
    out += std::to_string(k + 1);
    out += '\n';
    out += detail::format_clock(c.start, ',');
    out += " --> ";
    out += detail::format_clock(c.end, ',');
    out += '\n';
    std::vector<std::string> lines;
    for (auto l : detail::split_lines(c.text)) lines.emplace_back(l);
    out += detail::join_text_lines(lines);
    out += "\n\n";
  }
  return out;
}

inline std::string serialize_vtt(const Transcript& t) {
  validate(t);
  std::string out = "WEBVTT\n\n";
  for (const Cue& c : t.cues) {
    out += detail::format_clock(c.start, '.') + " --> " + detail::format_clock(c.end, '.') + '\n';
    out += c.text;
    out += "\n\n";
  }
  return out;
}

/// Plain caption text: cue texts joined by single spaces with all
/// whitespace runs (including line breaks) collapsed.
inline std::string flatten(const Transcript& t) {
  std::vector<std::string> words;
  for (const Cue& c : t.cues)
    for (auto& w : split_whitespace(c.text)) words.push_back(std::move(w));
  return join(words);
}

}  // namespace capfix
