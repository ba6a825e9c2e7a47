#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "capfix/corrector.hpp"
#include "capfix/error.hpp"
#include "capfix/metrics.hpp"
#include "capfix/subtitle_io.hpp"
#include "capfix/text_norm.hpp"

namespace capfix {

// ---------------------------------------------------------------------------
// Dataset

struct DatasetRecord {
  std::int64_t video_id = 0;
  std::string url;
  std::string youtube_caption;
  std::string ground_truth_caption;
  std::string domain;

  friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

enum class DatasetFormat { Csv, Jsonl };

inline constexpr std::string_view kKnownDomains[] = {"Education", "Cooking", "Travel and Tourism", "Entertainment",
                                                    "News"};

namespace detail {

// "Ground Truth_Caption" -> "groundtruthcaption"
inline std::string column_key(std::string_view name) {
  std::string key;
  for (char c : name)
    if (std::isalnum(static_cast<unsigned char>(c))) key += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return key;
}

struct SchemaColumn {
  std::string_view name;
  std::string_view key;
};

inline constexpr SchemaColumn kSchema[] = {{"VideoID", "videoid"},
                                           {"URL", "url"},
                                           {"Youtube_Caption", "youtubecaption"},
                                           {"Ground Truth_Caption", "groundtruthcaption"},
                                           {"Domain", "domain"}};

/// RFC-4180 records. Quoted fields may contain separators, doubled quotes
/// and line breaks. Each row carries the 1-based line it starts on.
struct CsvRow {
  std::size_t line;
  std::vector<std::string> fields;
};

inline std::vector<CsvRow> parse_csv(std::string_view data) {
  std::vector<CsvRow> rows;
  CsvRow row{1, {}};
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t line = 1;
  const auto end_row = [&] {
    row.fields.push_back(std::move(field));
    field.clear();
    const bool blank = row.fields.size() == 1 && row.fields[0].empty();
    if (!blank) rows.push_back(std::move(row));
    row = CsvRow{line, {}};
    field_started = false;
  };
  for (std::size_t k = 0; k < data.size(); ++k) {
    const char c = data[k];
    if (quoted) {
      if (c == '"') {
        if (k + 1 < data.size() && data[k + 1] == '"') {
          field += '"';
          ++k;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      row.fields.push_back(std::move(field));
      field.clear();
      field_started = false;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && k + 1 < data.size() && data[k + 1] == '\n') ++k;
      ++line;
      end_row();
    } else {
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw Error(Errc::MalformedRecord, "unterminated quoted field starting on line " + std::to_string(row.line));
  if (field_started || !row.fields.empty()) end_row();
  return rows;
}

inline std::int64_t parse_video_id(std::string_view s, const std::string& where) {
  const auto t = normalize_whitespace(s);
  std::int64_t v = 0;
  const auto* first = t.data();
  const auto* last = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (t.empty() || ec != std::errc() || ptr != last)
    throw Error(Errc::MalformedRecord, where + ": VideoID '" + t + "' is not an integer");
  return v;
}

}  // namespace detail

/// Maps the five dataset domains to their display names; other values are
/// kept as free text.
inline std::string canonical_domain(std::string_view raw) {
  const auto key = detail::column_key(raw);
  for (auto d : kKnownDomains)
    if (detail::column_key(d) == key) return std::string(d);
  return normalize_whitespace(raw);
}

inline DatasetFormat dataset_format_for(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".jsonl" || ext == ".ndjson" ? DatasetFormat::Jsonl : DatasetFormat::Csv;
}

namespace detail {

inline void finish_records(std::vector<DatasetRecord>& records, std::vector<std::size_t> rows) {
  std::map<std::int64_t, std::size_t> seen;
  for (std::size_t k = 0; k < records.size(); ++k) {
    auto& r = records[k];
    if (!seen.emplace(r.video_id, rows[k]).second)
      throw Error(Errc::DuplicateVideoId, "VideoID " + std::to_string(r.video_id) + " repeated on row " +
                                              std::to_string(rows[k]));
    for (auto* field : {&r.youtube_caption, &r.ground_truth_caption})
      if (normalize_whitespace(*field).empty())
        throw Error(Errc::EmptyCaptionField,
                    "row " + std::to_string(rows[k]) + " (VideoID " + std::to_string(r.video_id) + ")");
    r.domain = canonical_domain(r.domain);
  }
}

}  // namespace detail

/// Loads the dataset table (VideoID, URL, Youtube_Caption,
/// Ground Truth_Caption, Domain). Column names match case- and
/// punctuation-insensitively in any order; unknown columns are ignored with
/// a warning appended to `warnings`.
inline std::vector<DatasetRecord> load_dataset(std::string_view data, DatasetFormat format,
                                               std::vector<std::string>* warnings = nullptr) {
  data = detail::strip_bom(data);
  std::vector<DatasetRecord> records;
  std::vector<std::size_t> rows;
  const auto warn = [&](std::string w) {
    if (warnings) warnings->push_back(std::move(w));
  };

  if (format == DatasetFormat::Csv) {
    const auto table = detail::parse_csv(data);
    if (table.empty()) throw Error(Errc::EmptyDataset, "CSV has no header row");
    std::map<std::string, std::size_t> index;
    for (std::size_t c = 0; c < table[0].fields.size(); ++c) {
      const auto key = detail::column_key(table[0].fields[c]);
      const bool known = std::any_of(std::begin(detail::kSchema), std::end(detail::kSchema),
                                     [&](const auto& s) { return s.key == key; });
      if (known) index.emplace(key, c);
      else warn("ignoring unknown column '" + table[0].fields[c] + "'");
    }
    for (const auto& col : detail::kSchema)
      if (!index.count(std::string(col.key))) throw Error(Errc::MissingColumn, std::string(col.name));
    for (std::size_t r = 1; r < table.size(); ++r) {
      const auto& f = table[r].fields;
      const auto get = [&](std::string_view key) -> std::string {
        const auto c = index.at(std::string(key));
        return c < f.size() ? f[c] : std::string();
      };
      const std::string where = "row " + std::to_string(r) + " (line " + std::to_string(table[r].line) + ")";
      records.push_back({detail::parse_video_id(get("videoid"), where), get("url"), get("youtubecaption"),
                         get("groundtruthcaption"), get("domain")});
      rows.push_back(r);
    }
  } else {
    std::size_t line_no = 0;
    std::vector<std::string> unknown_seen;
    for (auto line : detail::split_lines(data)) {
      ++line_no;
      if (detail::is_blank(line)) continue;
      const auto doc = nlohmann::json::parse(line, nullptr, false);
      if (doc.is_discarded() || !doc.is_object())
        throw Error(Errc::MalformedJson, "line " + std::to_string(line_no) + " is not a JSON object", line_no);
      std::map<std::string, const nlohmann::json*> fields;
      for (const auto& [k, v] : doc.items()) {
        const auto key = detail::column_key(k);
        const bool known = std::any_of(std::begin(detail::kSchema), std::end(detail::kSchema),
                                       [&](const auto& s) { return s.key == key; });
        if (known) fields.emplace(key, &v);
        else if (std::find(unknown_seen.begin(), unknown_seen.end(), k) == unknown_seen.end()) {
          unknown_seen.push_back(k);
          warn("ignoring unknown field '" + k + "'");
        }
      }
      for (const auto& col : detail::kSchema)
        if (!fields.count(std::string(col.key))) throw Error(Errc::MissingColumn, std::string(col.name), line_no);
      const auto text = [&](std::string_view key) -> std::string {
        const auto* v = fields.at(std::string(key));
        if (v->is_string()) return v->get<std::string>();
        if (v->is_null()) return {};
        return v->dump();
      };
      const std::string where = "line " + std::to_string(line_no);
      const auto* id = fields.at("videoid");
      const std::int64_t video_id =
          id->is_number_integer() ? id->get<std::int64_t>() : detail::parse_video_id(text("videoid"), where);
      records.push_back({video_id, text("url"), text("youtubecaption"), text("groundtruthcaption"), text("domain")});
      rows.push_back(line_no);
    }
  }
  detail::finish_records(records, std::move(rows));
  return records;
}

// ---------------------------------------------------------------------------
// Correction cache

struct CacheKey {
  std::string backend_id;
  std::string model_name;
  std::string prompt_hash;

  auto operator<=>(const CacheKey&) const = default;
};

/// Read-through store of backend answers, persisted as one JSON object per
/// line. Later lines win when a key repeats. Thread-safe.
class CorrectionCache {
 public:
  struct Entry {
    std::string corrected;
    std::string timestamp;
  };

  CorrectionCache() = default;

  /// Loads `path` if it exists; new entries are appended to it.
  explicit CorrectionCache(std::filesystem::path path) : path_(std::move(path)) {
    std::ifstream in(path_, std::ios::binary);
    if (!in) return;
    std::string line;
    for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
      if (detail::is_blank(line)) continue;
      const auto doc = nlohmann::json::parse(line, nullptr, false);
      if (doc.is_discarded() || !doc.is_object())
        throw Error(Errc::MalformedJson, "cache " + path_.string() + " line " + std::to_string(line_no), line_no);
      try {
        entries_[{doc.at("backend_id"), doc.at("model_name"), doc.at("prompt_hash")}] = {
            doc.at("corrected"), doc.value("timestamp", "")};
      } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::MissingField, "cache " + path_.string() + " line " + std::to_string(line_no) + ": " + e.what(),
                    line_no);
      }
    }
  }

  std::optional<std::string> get(const CacheKey& key) const {
    std::lock_guard lock(mutex_);
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second.corrected;
  }

  void put(const CacheKey& key, std::string corrected) {
    std::lock_guard lock(mutex_);
    Entry e{std::move(corrected), now_utc()};
    if (!path_.empty()) {
      std::ofstream out(path_, std::ios::binary | std::ios::app);
      out << nlohmann::json{{"backend_id", key.backend_id},
                            {"model_name", key.model_name},
                            {"prompt_hash", key.prompt_hash},
                            {"corrected", e.corrected},
                            {"timestamp", e.timestamp}}
                 .dump()
          << '\n';
      out.flush();
      if (!out) throw std::runtime_error("cannot append to cache " + path_.string());
    }
    entries_[key] = std::move(e);
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
  }

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  static std::string now_utc() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
  }

  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::map<CacheKey, Entry> entries_;
};

inline CacheKey cache_key(std::string_view caption, const BackendConfig& config, const PromptTemplate& tpl) {
  return {config.backend_id, config.model_name, prompt_hash(build_prompt(caption, tpl))};
}

// ---------------------------------------------------------------------------
// Reports

inline constexpr std::string_view kBaselineLabel = "Youtube-ASR-Caption";

struct VideoResult {
  std::int64_t video_id = 0;
  std::string domain;
  MetricReport metrics;

  friend bool operator==(const VideoResult&, const VideoResult&) = default;
};

struct ConstraintSummary {
  std::size_t evaluated = 0;
  std::size_t sequence_violations = 0;
  std::size_t sync_risks = 0;

  friend bool operator==(const ConstraintSummary&, const ConstraintSummary&) = default;
};

/// Micro pools the counts of every video before forming each ratio; macro
/// is the unweighted mean of the per-video scores. Both are reported since
/// either may be the convention behind published corpus figures.
struct CorpusReport {
  std::string system_label;
  std::vector<VideoResult> per_video;
  MetricReport micro;
  MetricReport macro;
  std::map<std::string, MetricReport> per_domain;
  std::optional<ConstraintSummary> constraints;

  friend bool operator==(const CorpusReport&, const CorpusReport&) = default;
};

/// Mean of the per-video scores. Counts are the pooled totals.
inline MetricReport macro_average(std::span<const MetricReport> reports) {
  MetricReport m;
  if (reports.empty()) return m;
  const auto mean = [&](auto field) {
    double sum = 0.0;
    for (const auto& r : reports) sum += field(r);
    return sum / static_cast<double>(reports.size());
  };
  m.wer = mean([](const MetricReport& r) { return r.wer; });
  m.bleu = mean([](const MetricReport& r) { return r.bleu; });
  const auto rouge_mean = [&](RougeScore MetricReport::*member) {
    return RougeScore{mean([&](const MetricReport& r) { return (r.*member).recall; }),
                      mean([&](const MetricReport& r) { return (r.*member).precision; }),
                      mean([&](const MetricReport& r) { return (r.*member).f1; })};
  };
  m.rouge1 = rouge_mean(&MetricReport::rouge1);
  m.rouge2 = rouge_mean(&MetricReport::rouge2);
  m.rougeL = rouge_mean(&MetricReport::rougeL);
  for (const auto& r : reports) m.counts += r.counts;
  return m;
}

namespace detail {

/// Runs body(k) for k in [0, n) on up to `jobs` threads; rethrows the first
/// exception after all workers join.
template <class F>
void parallel_for(std::size_t n, std::size_t jobs, F&& body) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t k = 0; k < n; ++k) body(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (std::size_t w = 0; w < jobs; ++w)
    workers.emplace_back([&] {
      for (std::size_t k; (k = next.fetch_add(1)) < n;) {
        try {
          body(k);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

/// Scores hypotheses[k] against records[k].ground_truth_caption.
inline CorpusReport evaluate_corpus(std::span<const DatasetRecord> records, std::span<const std::string> hypotheses,
                                    std::string system_label, const MetricPolicies& policies = {},
                                    std::size_t jobs = 1) {
  if (records.empty()) throw Error(Errc::EmptyDataset, "no records to evaluate");
  if (hypotheses.size() != records.size()) throw std::invalid_argument("one hypothesis per record required");

  std::vector<PairStats> stats(records.size());
  detail::parallel_for(records.size(), jobs, [&](std::size_t k) {
    stats[k] = pair_stats(records[k].ground_truth_caption, hypotheses[k], policies);
    if (stats[k].counts.ref_len == 0)
      throw Error(Errc::EmptyReference, "video " + std::to_string(records[k].video_id) + ": ground truth has no words");
  });

  CorpusReport report;
  report.system_label = std::move(system_label);
  PairStats pooled;
  std::vector<MetricReport> all;
  std::map<std::string, std::vector<MetricReport>> by_domain;
  for (std::size_t k = 0; k < records.size(); ++k) {
    pooled += stats[k];
    auto r = report_from_stats(stats[k]);
    report.per_video.push_back({records[k].video_id, records[k].domain, r});
    if (!records[k].domain.empty()) by_domain[records[k].domain].push_back(r);
    all.push_back(std::move(r));
  }
  report.micro = report_from_stats(pooled);
  report.macro = macro_average(all);
  for (const auto& [domain, reports] : by_domain) report.per_domain[domain] = macro_average(reports);
  return report;
}

struct YoutubeCaptionSource {};

struct CachedCorrectionSource {
  const CorrectionCache* cache = nullptr;
  BackendConfig config;
  PromptTemplate prompt;
};

using HypothesisSource = std::variant<YoutubeCaptionSource, CachedCorrectionSource>;

/// "backend_id:model_name", or the backend id alone when no model is set.
inline std::string system_label(const BackendConfig& config) {
  return config.model_name.empty() ? config.backend_id : config.backend_id + ":" + config.model_name;
}

/// Scores either the raw ASR captions or cached corrections. A cached run
/// fails with MissingCorrectionsError naming every uncached video.
inline CorpusReport evaluate_corpus(std::span<const DatasetRecord> records, const HypothesisSource& source,
                                    const MetricPolicies& policies = {}, std::size_t jobs = 1) {
  if (records.empty()) throw Error(Errc::EmptyDataset, "no records to evaluate");
  std::vector<std::string> hyps;
  hyps.reserve(records.size());
  if (std::holds_alternative<YoutubeCaptionSource>(source)) {
    for (const auto& r : records) hyps.push_back(r.youtube_caption);
    return evaluate_corpus(records, hyps, std::string(kBaselineLabel), policies, jobs);
  }
  const auto& cached = std::get<CachedCorrectionSource>(source);
  std::vector<std::int64_t> missing;
  for (const auto& r : records) {
    auto hit = cached.cache ? cached.cache->get(cache_key(r.youtube_caption, cached.config, cached.prompt))
                            : std::nullopt;
    if (!hit) missing.push_back(r.video_id);
    hyps.push_back(hit.value_or(""));
  }
  if (!missing.empty()) throw MissingCorrectionsError(std::move(missing));
  return evaluate_corpus(records, hyps, system_label(cached.config), policies, jobs);
}

/// Raised when some corrections could not be obtained; the cache keeps
/// every correction that did succeed.
class BenchmarkError : public BackendError {
 public:
  BenchmarkError(Errc code, const std::string& what, std::vector<std::int64_t> ids)
      : BackendError(code, what, false), ids_(std::move(ids)) {}

  const std::vector<std::int64_t>& failed_ids() const noexcept { return ids_; }

 private:
  std::vector<std::int64_t> ids_;
};

struct BenchmarkOptions {
  std::size_t jobs = 1;
  double sync_threshold = kDefaultSyncThreshold;
  MetricPolicies policies;
};

struct BenchmarkStats {
  std::size_t backend_calls = 0;
  std::size_t cache_hits = 0;
};

/// Corrects every ASR caption through the cache (a hit never reaches the
/// backend), persists each new answer immediately, then scores the
/// corrections and attaches the constraint counts.
inline CorpusReport run_benchmark(std::span<const DatasetRecord> records, CompletionBackend& backend,
                                  const BackendConfig& config, const PromptTemplate& tpl, CorrectionCache& cache,
                                  const BenchmarkOptions& options = {}, BenchmarkStats* stats = nullptr) {
  if (records.empty()) throw Error(Errc::EmptyDataset, "no records to benchmark");
  std::vector<std::string> corrected(records.size());
  std::vector<ConstraintReport> diagnostics(records.size());
  std::vector<std::optional<std::string>> failures(records.size());
  std::atomic<std::size_t> calls{0}, hits{0};

  detail::parallel_for(records.size(), options.jobs, [&](std::size_t k) {
    const auto& r = records[k];
    const auto key = cache_key(r.youtube_caption, config, tpl);
    if (auto hit = cache.get(key)) {
      ++hits;
      diagnostics[k] = check_constraints(r.youtube_caption, *hit, options.sync_threshold);
      corrected[k] = std::move(*hit);
      return;
    }
    try {
      ++calls;
      auto result = correct(r.youtube_caption, backend, config, tpl, options.sync_threshold);
      cache.put(key, result.corrected);
      diagnostics[k] = result.diagnostics;
      corrected[k] = std::move(result.corrected);
    } catch (const Error& e) {
      failures[k] = e.what();
    }
  });
  if (stats) *stats = {calls.load(), hits.load()};

  std::vector<std::int64_t> failed;
  std::string first;
  for (std::size_t k = 0; k < records.size(); ++k)
    if (failures[k]) {
      if (failed.empty()) first = "video " + std::to_string(records[k].video_id) + ": " + *failures[k];
      failed.push_back(records[k].video_id);
    }
  if (!failed.empty()) {
    std::string msg = "corrections missing for video ids";
    for (std::size_t k = 0; k < failed.size(); ++k) msg += (k ? ", " : " ") + std::to_string(failed[k]);
    throw BenchmarkError(Errc::BackendUnavailable, msg + " (first failure: " + first + ")", std::move(failed));
  }

  auto report = evaluate_corpus(records, corrected, system_label(config), options.policies, options.jobs);
  ConstraintSummary summary;
  summary.evaluated = records.size();
  for (const auto& d : diagnostics) {
    summary.sequence_violations += d.sequence_violation ? 1 : 0;
    summary.sync_risks += d.sync_risk ? 1 : 0;
  }
  report.constraints = summary;
  return report;
}

// ---------------------------------------------------------------------------
// Rendering

enum class ReportFormat { Text, Markdown, Json };

inline void to_json(nlohmann::json& j, const CorpusReport& r) {
  j = nlohmann::json::object();
  j["system"] = r.system_label;
  j["micro"] = r.micro;
  j["macro"] = r.macro;
  j["per_domain"] = nlohmann::json::object();
  for (const auto& [d, m] : r.per_domain) j["per_domain"][d] = m;
  j["per_video"] = nlohmann::json::array();
  for (const auto& v : r.per_video)
    j["per_video"].push_back({{"video_id", v.video_id}, {"domain", v.domain}, {"metrics", v.metrics}});
  if (r.constraints)
    j["constraints"] = {{"evaluated", r.constraints->evaluated},
                        {"sequence_violations", r.constraints->sequence_violations},
                        {"sync_risks", r.constraints->sync_risks}};
}

inline void from_json(const nlohmann::json& j, CorpusReport& r) {
  r.system_label = j.at("system").get<std::string>();
  r.micro = j.at("micro").get<MetricReport>();
  r.macro = j.at("macro").get<MetricReport>();
  r.per_domain.clear();
  for (const auto& [d, m] : j.at("per_domain").items()) r.per_domain[d] = m.get<MetricReport>();
  r.per_video.clear();
  for (const auto& v : j.at("per_video"))
    r.per_video.push_back({v.at("video_id").get<std::int64_t>(), v.at("domain").get<std::string>(),
                           v.at("metrics").get<MetricReport>()});
  r.constraints.reset();
  if (j.contains("constraints")) {
    const auto& c = j.at("constraints");
    r.constraints = ConstraintSummary{c.at("evaluated").get<std::size_t>(), c.at("sequence_violations").get<std::size_t>(),
                                      c.at("sync_risks").get<std::size_t>()};
  }
}

namespace detail {

inline std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct TableRow {
  std::string label;
  const MetricReport* m;
};

inline std::vector<std::string> cells(const MetricReport& m) {
  return {fixed2(m.wer * 100.0), fixed2(m.bleu), fixed2(m.rouge1.recall), fixed2(m.rouge2.recall),
          fixed2(m.rougeL.recall)};
}

inline void render_table(std::string& out, const std::vector<TableRow>& rows, ReportFormat fmt) {
  static const std::vector<std::string> header = {"Metric", "WER", "BLEU", "ROUGE-1", "ROUGE-2", "ROUGE-L"};
  if (fmt == ReportFormat::Markdown) {
    out += "| Metric | WER | BLEU | ROUGE-1 | ROUGE-2 | ROUGE-L |\n";
    out += "|---|---:|---:|---:|---:|---:|\n";
    for (const auto& row : rows) {
      out += "| " + row.label;
      for (const auto& c : cells(*row.m)) out += " | " + c;
      out += " |\n";
    }
    return;
  }
  std::size_t label_width = header[0].size();
  for (const auto& row : rows) label_width = std::max(label_width, row.label.size());
  const auto pad_right = [](std::string s, std::size_t w) { return s + std::string(w > s.size() ? w - s.size() : 0, ' '); };
  const auto pad_left = [](std::string s, std::size_t w) { return std::string(w > s.size() ? w - s.size() : 0, ' ') + s; };
  out += pad_right(header[0], label_width);
  for (std::size_t c = 1; c < header.size(); ++c) out += "  " + pad_left(header[c], 7);
  out += '\n';
  for (const auto& row : rows) {
    out += pad_right(row.label, label_width);
    for (const auto& c : cells(*row.m)) out += "  " + pad_left(c, 7);
    out += '\n';
  }
}

}  // namespace detail

/// TEXT/MARKDOWN: one results table with micro and macro rows per system
/// (WER in percent, other scores as ratios, two decimals), a per-domain
/// table when any system has domains, and constraint counts for corrected
/// systems. JSON: an array holding each full report.
inline std::string render_reports(std::span<const CorpusReport> reports, ReportFormat fmt) {
  if (fmt == ReportFormat::Json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) arr.push_back(r);
    return arr.dump(2) + "\n";
  }
  std::string out;
  const bool md = fmt == ReportFormat::Markdown;
  std::vector<detail::TableRow> rows;
  for (const auto& r : reports) {
    rows.push_back({r.system_label + " (micro)", &r.micro});
    rows.push_back({r.system_label + " (macro)", &r.macro});
  }
  if (md) out += "## Caption correction results\n\n";
  detail::render_table(out, rows, fmt);

  std::vector<detail::TableRow> domain_rows;
  for (const auto& r : reports)
    for (const auto& [d, m] : r.per_domain) domain_rows.push_back({r.system_label + " / " + d, &m});
  if (!domain_rows.empty()) {
    out += md ? "\n## Per domain (macro)\n\n" : "\nPer domain (macro)\n";
    detail::render_table(out, domain_rows, fmt);
  }

  bool any_constraints = false;
  for (const auto& r : reports) {
    if (!r.constraints) continue;
    if (!any_constraints) out += md ? "\n## Word-sequence constraints\n\n" : "\nWord-sequence constraints\n";
    any_constraints = true;
    out += (md ? "- " : "") + r.system_label + ": " + std::to_string(r.constraints->evaluated) + " corrected, " +
           std::to_string(r.constraints->sequence_violations) + " sequence violations, " +
           std::to_string(r.constraints->sync_risks) + " sync risks\n";
  }
  return out;
}

/// Single report; JSON renders the bare report object.
inline std::string render_report(const CorpusReport& report, ReportFormat fmt) {
  if (fmt == ReportFormat::Json) return nlohmann::json(report).dump(2) + "\n";
  return render_reports(std::span<const CorpusReport>(&report, 1), fmt);
}

}  // namespace capfix
