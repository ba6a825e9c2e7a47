#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <thread>
#include <utility>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "capfix/error.hpp"
#include "capfix/metrics.hpp"
#include "capfix/text_norm.hpp"

namespace capfix {

inline constexpr std::string_view kCaptionPlaceholder = "{caption}";
inline constexpr std::string_view kDefaultInstruction =
    "Correct the caption according to English standards. Don't change the word sequence";
inline constexpr double kDefaultSyncThreshold = 0.2;

/// Zero-shot correction prompt. `text` holds exactly one "{caption}"
/// placeholder.
struct PromptTemplate {
  std::string text = std::string(kDefaultInstruction) + "\n\n" + std::string(kCaptionPlaceholder);

  static PromptTemplate default_template() { return {}; }
};

inline std::string build_prompt(std::string_view caption, const PromptTemplate& tpl = {}) {
  if (normalize_whitespace(caption).empty()) throw Error(Errc::EmptyCaption, "caption is empty");
  const auto at = tpl.text.find(kCaptionPlaceholder);
  if (at == std::string::npos || tpl.text.find(kCaptionPlaceholder, at + 1) != std::string::npos)
    throw Error(Errc::InvalidTemplate, "template must contain exactly one {caption} placeholder");
  std::string out = tpl.text.substr(0, at);
  out.append(caption);
  out.append(tpl.text, at + kCaptionPlaceholder.size());
  return out;
}

/// Lowercase hex SHA-256 of `data`.
inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[digest[k] >> 4];
    out += hex[digest[k] & 0xF];
  }
  return out;
}

inline std::string prompt_hash(std::string_view rendered_prompt) { return sha256_hex(rendered_prompt); }

struct BackendConfig {
  std::string backend_id = "mock";
  std::string endpoint;
  std::string model_name;
  double temperature = 0.0;
  std::size_t max_retries = 3;
  std::chrono::milliseconds timeout{30'000};
  std::chrono::milliseconds backoff{500};  // doubled after every failed attempt
  std::string api_key_env;
};

struct CompletionRequest {
  std::string prompt;
  std::string caption;
};

/// A service that answers a correction prompt. Implementations throw
/// BackendError; retryable errors are retried by correct().
class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual std::string complete(const CompletionRequest& request, const BackendConfig& config) = 0;
};

/// Deterministic stand-in for an LLM. Exact-substring rules are applied to
/// the caption in one left-to-right scan; at each position the longest
/// matching pattern wins. No rules means the identity correction.
class MockRulesBackend final : public CompletionBackend {
 public:
  MockRulesBackend() = default;
  explicit MockRulesBackend(std::map<std::string, std::string> rules) : rules_(std::move(rules)) {
    if (rules_.count("")) throw std::invalid_argument("mock rule pattern must be non-empty");
  }

  /// Rules file: a JSON object mapping pattern to replacement.
  static MockRulesBackend from_json(std::string_view text) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(Errc::MalformedJson, std::string("mock rules: ") + e.what());
    }
    if (!doc.is_object()) throw Error(Errc::MalformedJson, "mock rules must be a JSON object");
    std::map<std::string, std::string> rules;
    for (const auto& [k, v] : doc.items()) {
      if (!v.is_string()) throw Error(Errc::MalformedJson, "mock rule '" + k + "' must map to a string");
      rules.emplace(k, v.get<std::string>());
    }
    return MockRulesBackend(std::move(rules));
  }

  std::string apply(std::string_view text) const {
    std::string out;
    out.reserve(text.size());
    for (std::size_t pos = 0; pos < text.size();) {
      const std::pair<const std::string, std::string>* best = nullptr;
      for (const auto& rule : rules_)
        if (text.substr(pos).starts_with(rule.first) && (!best || rule.first.size() > best->first.size()))
          best = &rule;
      if (best) {
        out += best->second;
        pos += best->first.size();
      } else {
        out += text[pos++];
      }
    }
    return out;
  }

  std::string complete(const CompletionRequest& request, const BackendConfig&) override {
    return apply(request.caption);
  }

  const std::map<std::string, std::string>& rules() const noexcept { return rules_; }

 private:
  std::map<std::string, std::string> rules_;
};

/// Drops surrounding whitespace, a markdown code fence and one pair of
/// matching quotes that chat models like to wrap answers in.
inline std::string clean_response(std::string_view raw) {
  std::string s = std::string(raw);
  const auto trim_ws = [](std::string& t) {
    const auto b = t.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
      t.clear();
      return;
    }
    t = t.substr(b, t.find_last_not_of(" \t\r\n") - b + 1);
  };
  trim_ws(s);
  if (s.starts_with("```")) {
    const auto nl = s.find('\n');
    s = nl == std::string::npos ? s.substr(3) : s.substr(nl + 1);
    if (s.ends_with("```")) s.resize(s.size() - 3);
    trim_ws(s);
  }
  static const std::pair<std::string_view, std::string_view> quotes[] = {
      {"\"", "\""}, {"'", "'"}, {"\xE2\x80\x9C", "\xE2\x80\x9D"}, {"\xE2\x80\x98", "\xE2\x80\x99"}};
  for (const auto& [open, close] : quotes) {
    if (s.size() >= open.size() + close.size() && s.starts_with(open) && s.ends_with(close)) {
      s = s.substr(open.size(), s.size() - open.size() - close.size());
      trim_ws(s);
      break;
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Constraint diagnostics

/// Word-sequence preservation means the original-to-corrected alignment has
/// no insertions or deletions; substitutions are allowed.
struct ConstraintReport {
  double length_ratio = 1.0;
  AlignmentCounts alignment_counts;
  bool sequence_violation = false;
  bool sync_risk = false;

  friend bool operator==(const ConstraintReport&, const ConstraintReport&) = default;
};

inline ConstraintReport check_constraints(std::string_view original, std::string_view corrected,
                                          double sync_threshold = kDefaultSyncThreshold) {
  const auto orig = tokenize(original, kWerPolicy);
  const auto corr = tokenize(corrected, kWerPolicy);
  ConstraintReport r;
  r.alignment_counts = align(orig, corr).counts;
  if (!orig.empty())
    r.length_ratio = static_cast<double>(corr.size()) / static_cast<double>(orig.size());
  else
    r.length_ratio = corr.empty() ? 1.0 : HUGE_VAL;
  r.sequence_violation = r.alignment_counts.insertions > 0 || r.alignment_counts.deletions > 0;
  r.sync_risk = std::abs(r.length_ratio - 1.0) > sync_threshold;
  return r;
}

struct CorrectionResult {
  std::string original;
  std::string corrected;
  std::string backend_id;
  std::string prompt_hash;
  ConstraintReport diagnostics;
  std::chrono::milliseconds latency{0};
  std::size_t attempts = 0;
};

/// Diagnostics only: a violating correction is still returned.
inline CorrectionResult make_result(std::string original, std::string corrected, const BackendConfig& config,
                                    std::string hash, double sync_threshold) {
  CorrectionResult r;
  r.diagnostics = check_constraints(original, corrected, sync_threshold);
  r.original = std::move(original);
  r.corrected = std::move(corrected);
  r.backend_id = config.backend_id;
  r.prompt_hash = std::move(hash);
  return r;
}

/// Renders the prompt, calls the backend with exponential-backoff retries
/// on transient failures, cleans the answer and fills the diagnostics.
inline CorrectionResult correct(std::string_view caption, CompletionBackend& backend, const BackendConfig& config,
                                const PromptTemplate& tpl = {}, double sync_threshold = kDefaultSyncThreshold) {
  const auto started = std::chrono::steady_clock::now();
  CompletionRequest request{build_prompt(caption, tpl), std::string(caption)};
  const auto hash = prompt_hash(request.prompt);

  auto delay = config.backoff;
  for (std::size_t attempt = 0;; ++attempt) {
    try {
      auto corrected = clean_response(backend.complete(request, config));
      if (corrected.empty()) throw BackendError(Errc::BackendRefusal, "backend returned no text", false);
      auto r = make_result(std::string(caption), std::move(corrected), config, hash, sync_threshold);
      r.attempts = attempt + 1;
      r.latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
      return r;
    } catch (const BackendError& e) {
      if (!e.retryable()) throw;
      if (attempt >= config.max_retries) {
        const auto code = e.code() == Errc::Timeout ? Errc::Timeout : Errc::BackendUnavailable;
        throw BackendError(code, "giving up after " + std::to_string(attempt + 1) + " attempts: " + e.what(), false,
                           e.http_status());
      }
    }
    if (delay.count() > 0) std::this_thread::sleep_for(delay);
    delay *= 2;
  }
}

}  // namespace capfix
