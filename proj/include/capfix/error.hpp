#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace capfix {

enum class Errc {
  // subtitle_io
  EmptyInput,
  MalformedTimestamp,
  MalformedIndex,
  NonMonotonicIndex,
  NonMonotonicTime,
  MissingHeader,
  MalformedJson,
  MissingField,
  InvalidTranscript,
  // text_norm / metrics
  InvalidOrder,
  EmptyReference,
  // corrector
  EmptyCaption,
  InvalidTemplate,
  BackendUnavailable,
  BackendRefusal,
  Timeout,
  // resync
  EmptyOriginal,
  EmptyCorrection,
  // corpus
  MissingColumn,
  DuplicateVideoId,
  EmptyCaptionField,
  MalformedRecord,
  EmptyDataset,
  MissingCorrections,
};

constexpr std::string_view errc_name(Errc c) {
  switch (c) {
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::MalformedTimestamp: return "MalformedTimestamp";
    case Errc::MalformedIndex: return "MalformedIndex";
    case Errc::NonMonotonicIndex: return "NonMonotonicIndex";
    case Errc::NonMonotonicTime: return "NonMonotonicTime";
    case Errc::MissingHeader: return "MissingHeader";
    case Errc::MalformedJson: return "MalformedJson";
    case Errc::MissingField: return "MissingField";
    case Errc::InvalidTranscript: return "InvalidTranscript";
    case Errc::InvalidOrder: return "InvalidOrder";
    case Errc::EmptyReference: return "EmptyReference";
    case Errc::EmptyCaption: return "EmptyCaption";
    case Errc::InvalidTemplate: return "InvalidTemplate";
    case Errc::BackendUnavailable: return "BackendUnavailable";
    case Errc::BackendRefusal: return "BackendRefusal";
    case Errc::Timeout: return "Timeout";
    case Errc::EmptyOriginal: return "EmptyOriginal";
    case Errc::EmptyCorrection: return "EmptyCorrection";
    case Errc::MissingColumn: return "MissingColumn";
    case Errc::DuplicateVideoId: return "DuplicateVideoId";
    case Errc::EmptyCaptionField: return "EmptyCaptionField";
    case Errc::MalformedRecord: return "MalformedRecord";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::MissingCorrections: return "MissingCorrections";
  }
  return "Unknown";
}

/// Every failure raised by the library. `line()` is the 1-based input line
/// for parse errors and 0 when not applicable.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what, std::size_t line = 0)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code),
        line_(line) {}

  Errc code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }

 private:
  Errc code_;
  std::size_t line_;
};

/// Raised by completion backends. Retryable failures (HTTP 429/5xx,
/// connection drops, timeouts) are retried by the corrector.
class BackendError : public Error {
 public:
  BackendError(Errc code, const std::string& what, bool retryable, int http_status = 0)
      : Error(code, what), retryable_(retryable), http_status_(http_status) {}

  bool retryable() const noexcept { return retryable_; }
  int http_status() const noexcept { return http_status_; }

 private:
  bool retryable_;
  int http_status_;
};

class MissingCorrectionsError : public Error {
 public:
  explicit MissingCorrectionsError(std::vector<std::int64_t> ids)
      : Error(Errc::MissingCorrections, describe(ids)), ids_(std::move(ids)) {}

  const std::vector<std::int64_t>& video_ids() const noexcept { return ids_; }

 private:
  static std::string describe(const std::vector<std::int64_t>& ids) {
    std::string s = "no cached correction for video ids";
    for (std::size_t k = 0; k < ids.size(); ++k) s += (k ? ", " : " ") + std::to_string(ids[k]);
    return s;
  }

  std::vector<std::int64_t> ids_;
};

}  // namespace capfix
