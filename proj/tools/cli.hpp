#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "capfix/capfix.hpp"
#include "capfix/http_backend.hpp"

namespace capfix::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kBackendError = 3, kConstraintViolation = 4 };

/// Hook for tests: builds the completion backend for a config. The default
/// builds the rules mock or the HTTP chat client.
using BackendFactory =
    std::function<std::unique_ptr<CompletionBackend>(const BackendConfig&, const MockRulesBackend* rules)>;

struct Environment {
  BackendFactory backend_factory;
};

namespace detail {

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::EmptyInput, "cannot read '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_output(const std::string& path, const std::string& data, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << data;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::EmptyInput, "cannot write '" + path + "'");
  f << data;
}

inline SourceFormat format_from_name(const std::string& name) {
  if (name == "srt") return SourceFormat::Srt;
  if (name == "vtt") return SourceFormat::Vtt;
  if (name == "ytjson" || name == "json") return SourceFormat::YtJson;
  return SourceFormat::Plain;
}

inline SourceFormat format_from_path(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  if (!ext.empty()) ext.erase(0, 1);
  return format_from_name(ext);
}

/// "@path" reads a file (subtitle files are parsed and flattened); anything
/// else is the literal text.
inline std::string literal_or_file(const std::string& arg) {
  if (arg.empty() || arg[0] != '@') return arg;
  const std::filesystem::path p = arg.substr(1);
  const auto data = read_file(p);
  const auto fmt = format_from_path(p);
  if (fmt == SourceFormat::Plain) return data;
  return flatten(parse_transcript(data, fmt));
}

inline ReportFormat report_format(const std::string& name) {
  if (name == "md" || name == "markdown") return ReportFormat::Markdown;
  if (name == "json") return ReportFormat::Json;
  return ReportFormat::Text;
}

/// Flat "key = value" lines mirroring long flag names; '#' starts a comment.
inline std::vector<std::pair<std::string, std::string>> read_config(const std::filesystem::path& p) {
  std::vector<std::pair<std::string, std::string>> kv;
  std::istringstream in(read_file(p));
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    const auto t = std::string(capfix::detail::trim(line));
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw Error(Errc::MalformedRecord, p.string() + ":" + std::to_string(n) + ": expected key = value", n);
    auto key = std::string(capfix::detail::trim(std::string_view(t).substr(0, eq)));
    auto value = std::string(capfix::detail::trim(std::string_view(t).substr(eq + 1)));
    if (key.starts_with("--")) key.erase(0, 2);
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    kv.emplace_back(std::move(key), std::move(value));
  }
  return kv;
}

/// Fills options the command line left unset; command-line values win.
inline void apply_config(CLI::App& sub, const std::filesystem::path& p) {
  for (const auto& [key, value] : read_config(p)) {
    CLI::Option* opt = sub.get_option_no_throw("--" + key);
    if (!opt) throw Error(Errc::MalformedRecord, p.string() + ": unknown key '" + key + "' for " + sub.get_name());
    if (opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

struct BackendFlags {
  std::string backend = "mock";
  std::string mock_rules;
  std::string endpoint;
  std::string model;
  std::string api_key_env;
  std::string prompt;
  double temperature = 0.0;
  std::size_t max_retries = 3;
  long timeout_ms = 30'000;
  long backoff_ms = 500;
  double sync_threshold = kDefaultSyncThreshold;

  void declare(CLI::App& sub) {
    sub.add_option("--backend", backend, "Completion backend")->check(CLI::IsMember({"mock", "http"}));
    sub.add_option("--mock-rules", mock_rules, "JSON object of substring replacement rules (mock backend)");
    sub.add_option("--endpoint", endpoint, "Chat-completion URL (http backend)");
    sub.add_option("--model", model, "Model name sent to the http backend");
    sub.add_option("--api-key-env", api_key_env, "Environment variable holding the bearer token");
    sub.add_option("--prompt", prompt, "Prompt template with one {caption} placeholder (literal or @file)");
    sub.add_option("--temperature", temperature, "Sampling temperature");
    sub.add_option("--max-retries", max_retries, "Retries on transient backend failures");
    sub.add_option("--timeout-ms", timeout_ms, "Per-request timeout");
    sub.add_option("--backoff-ms", backoff_ms, "Initial retry delay, doubled per retry");
    sub.add_option("--sync-threshold", sync_threshold, "Max |length ratio - 1| before flagging sync risk");
  }

  BackendConfig config(const MockRulesBackend* rules) const {
    BackendConfig c;
    if (backend == "http") {
      c.backend_id = "http-chat";
      if (endpoint.empty()) throw Error(Errc::BackendUnavailable, "--endpoint is required for the http backend");
      c.model_name = model;
    } else {
      c.backend_id = "mock";
      // Distinct rule sets must not share cache entries.
      std::string canon;
      for (const auto& [k, v] : rules->rules()) canon += k + '\0' + v + '\0';
      c.model_name = rules->rules().empty() ? "identity" : "rules-" + sha256_hex(canon).substr(0, 12);
    }
    c.endpoint = endpoint;
    c.temperature = temperature;
    c.max_retries = max_retries;
    c.timeout = std::chrono::milliseconds(timeout_ms);
    c.backoff = std::chrono::milliseconds(backoff_ms);
    c.api_key_env = api_key_env;
    return c;
  }

  PromptTemplate prompt_template() const {
    PromptTemplate t;
    if (!prompt.empty()) t.text = literal_or_file(prompt);
    return t;
  }

  MockRulesBackend rules() const {
    return mock_rules.empty() ? MockRulesBackend() : MockRulesBackend::from_json(read_file(mock_rules));
  }
};

inline std::unique_ptr<CompletionBackend> default_backend(const BackendConfig& config, const MockRulesBackend* rules) {
  if (config.backend_id == "http-chat") return std::make_unique<HttpChatBackend>();
  return std::make_unique<MockRulesBackend>(*rules);
}

inline std::string describe(const ConstraintReport& d) {
  std::ostringstream s;
  s << "constraints: sequence_violation=" << (d.sequence_violation ? "true" : "false")
    << " sync_risk=" << (d.sync_risk ? "true" : "false") << " length_ratio=" << d.length_ratio
    << " S=" << d.alignment_counts.substitutions << " D=" << d.alignment_counts.deletions
    << " I=" << d.alignment_counts.insertions;
  return s.str();
}

inline std::string text_report(const MetricReport& r) {
  std::string s;
  s += "WER      " + capfix::detail::fixed2(r.wer * 100.0) + "%\n";
  s += "BLEU     " + capfix::detail::fixed2(r.bleu) + "\n";
  s += "ROUGE-1  " + capfix::detail::fixed2(r.rouge1.recall) + "\n";
  s += "ROUGE-2  " + capfix::detail::fixed2(r.rouge2.recall) + "\n";
  s += "ROUGE-L  " + capfix::detail::fixed2(r.rougeL.recall) + "\n";
  s += "S=" + std::to_string(r.counts.substitutions) + " D=" + std::to_string(r.counts.deletions) +
       " I=" + std::to_string(r.counts.insertions) + " N=" + std::to_string(r.counts.ref_len) + "\n";
  return s;
}

}  // namespace detail

/// Runs the command line; returns the process exit status. Machine output
/// goes to `out`, diagnostics to `err`.
inline int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err, Environment env = {}) {
  if (!env.backend_factory) env.backend_factory = detail::default_backend;

  CLI::App app{"capfix: caption correction and evaluation toolkit", "capfix"};
  app.require_subcommand(1);
  app.fallthrough();
  bool verbose = false;
  std::string config_path;
  app.add_flag("-v,--verbose", verbose, "Progress and cache statistics on stderr");
  app.add_option("--config", config_path, "Flat key = value file mirroring long flag names");

  // convert
  auto* convert = app.add_subcommand("convert", "Convert between subtitle formats");
  std::string conv_in, conv_in_format, conv_out, conv_out_format = "srt";
  convert->add_option("--in", conv_in, "Input subtitle file");
  convert->add_option("--in-format", conv_in_format, "Input format (default: from extension)")
      ->check(CLI::IsMember({"srt", "vtt", "ytjson"}));
  convert->add_option("--out", conv_out, "Output file (default: stdout)");
  convert->add_option("--out-format", conv_out_format, "Output format")->check(CLI::IsMember({"srt", "vtt", "txt"}));

  // eval
  auto* eval = app.add_subcommand("eval", "Score a hypothesis caption against a reference");
  std::string eval_ref, eval_hyp, wer_policy = "stripped", bleu_policy = "separate", rouge_policy = "stripped";
  bool eval_json = false;
  eval->add_option("--ref", eval_ref, "Reference text, or @path");
  eval->add_option("--hyp", eval_hyp, "Hypothesis text, or @path");
  eval->add_flag("--json", eval_json, "Print the report as JSON");
  eval->add_option("--wer-policy", wer_policy, "attached|separate|stripped[:cased]");
  eval->add_option("--bleu-policy", bleu_policy, "attached|separate|stripped[:cased]");
  eval->add_option("--rouge-policy", rouge_policy, "attached|separate|stripped[:cased]");

  // correct
  auto* correct_cmd = app.add_subcommand("correct", "Correct a caption through a completion backend");
  detail::BackendFlags corr_flags;
  std::string corr_in, corr_out, corr_timed;
  bool corr_resync = false, corr_strict = false;
  correct_cmd->add_option("--in", corr_in, "Caption text, or @path");
  corr_flags.declare(*correct_cmd);
  correct_cmd->add_flag("--resync", corr_resync, "Re-time the correction onto --timed-in cues and emit SRT");
  correct_cmd->add_option("--timed-in", corr_timed, "Timed transcript (srt, vtt or ytjson) for --resync");
  correct_cmd->add_flag("--strict-sequence", corr_strict, "Exit 4 when the correction inserts or deletes words");
  correct_cmd->add_option("--out", corr_out, "Output file (default: stdout)");

  // bench
  auto* bench = app.add_subcommand("bench", "Score the ASR baseline and a correction backend over a dataset");
  detail::BackendFlags bench_flags;
  std::string bench_dataset, bench_dataset_format, bench_cache, bench_report, bench_format = "text", bench_label;
  bool baseline_only = false;
  std::size_t jobs = 1;
  bench->add_option("--dataset", bench_dataset, "Dataset CSV or JSONL");
  bench->add_option("--dataset-format", bench_dataset_format, "csv|jsonl (default: from extension)")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  bench_flags.declare(*bench);
  bench->add_option("--cache", bench_cache, "Correction cache (JSONL), read-through and appended");
  bench->add_option("--report", bench_report, "Report file (default: stdout)");
  bench->add_option("--format", bench_format, "Report format")->check(CLI::IsMember({"text", "md", "json"}));
  bench->add_option("--label", bench_label, "System label for the corrected rows");
  bench->add_flag("--baseline-only", baseline_only, "Score the ASR captions only");
  bench->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  std::vector<std::string> args(argv.rbegin(), argv.rend());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  const auto log = [&](const std::string& msg) {
    if (verbose) err << msg << '\n';
  };

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (!config_path.empty()) detail::apply_config(*sub, config_path);

    if (sub == convert) {
      if (conv_in.empty()) throw Error(Errc::EmptyInput, "--in is required");
      const auto fmt = conv_in_format.empty() ? detail::format_from_path(conv_in) : detail::format_from_name(conv_in_format);
      if (fmt == SourceFormat::Plain) throw Error(Errc::EmptyInput, "cannot infer input format; pass --in-format");
      const auto t = parse_transcript(detail::read_file(conv_in), fmt);
      std::string data;
      if (conv_out_format == "txt") data = flatten(t) + "\n";
      else if (conv_out_format == "vtt") data = serialize_vtt(t);
      else data = serialize_srt(t);
      detail::write_output(conv_out, data, out);
      log("converted " + std::to_string(t.size()) + " cues");
      return kOk;
    }

    if (sub == eval) {
      if (eval_ref.empty() || eval_hyp.empty()) throw Error(Errc::EmptyReference, "--ref and --hyp are required");
      MetricPolicies policies;
      try {
        policies.wer = parse_policy(wer_policy);
        policies.bleu = parse_policy(bleu_policy);
        policies.rouge = parse_policy(rouge_policy);
      } catch (const std::invalid_argument& e) {
        throw Error(Errc::MalformedRecord, e.what());
      }
      const auto report = evaluate_pair(detail::literal_or_file(eval_ref), detail::literal_or_file(eval_hyp), policies);
      out << (eval_json ? nlohmann::json(report).dump() + "\n" : detail::text_report(report));
      return kOk;
    }

    if (sub == correct_cmd) {
      Transcript timed;
      if (corr_resync) {
        if (corr_timed.empty()) throw Error(Errc::EmptyInput, "--resync needs --timed-in");
        timed = parse_transcript(detail::read_file(corr_timed), detail::format_from_path(corr_timed));
      }
      const std::string caption = !corr_in.empty() ? detail::literal_or_file(corr_in) : flatten(timed);
      if (caption.empty()) throw Error(Errc::EmptyCaption, "nothing to correct; pass --in");
      const auto rules = corr_flags.rules();
      const auto config = corr_flags.config(&rules);
      auto backend = env.backend_factory(config, &rules);
      const auto result = capfix::correct(caption, *backend, config, corr_flags.prompt_template(),
                                          corr_flags.sync_threshold);
      err << detail::describe(result.diagnostics) << '\n';
      log("backend " + result.backend_id + " answered in " + std::to_string(result.latency.count()) + " ms after " +
          std::to_string(result.attempts) + " attempt(s)");
      const auto data = corr_resync ? serialize_srt(realign(timed, result.corrected)) : result.corrected + "\n";
      detail::write_output(corr_out, data, out);
      if (corr_strict && result.diagnostics.sequence_violation) {
        err << "word sequence changed (--strict-sequence)\n";
        return kConstraintViolation;
      }
      return kOk;
    }

    if (sub == bench) {
      if (bench_dataset.empty()) throw Error(Errc::EmptyDataset, "--dataset is required");
      const auto fmt = bench_dataset_format.empty() ? dataset_format_for(bench_dataset)
                       : bench_dataset_format == "jsonl" ? DatasetFormat::Jsonl
                                                         : DatasetFormat::Csv;
      std::vector<std::string> warnings;
      const auto records = load_dataset(detail::read_file(bench_dataset), fmt, &warnings);
      for (const auto& w : warnings) err << "warning: " << w << '\n';
      log("loaded " + std::to_string(records.size()) + " records");

      std::vector<CorpusReport> reports;
      reports.push_back(evaluate_corpus(records, YoutubeCaptionSource{}, {}, jobs));
      if (!baseline_only) {
        const auto rules = bench_flags.rules();
        auto config = bench_flags.config(&rules);
        auto backend = env.backend_factory(config, &rules);
        CorrectionCache cache = bench_cache.empty() ? CorrectionCache() : CorrectionCache(bench_cache);
        BenchmarkOptions options;
        options.jobs = jobs;
        options.sync_threshold = bench_flags.sync_threshold;
        BenchmarkStats stats;
        auto report = run_benchmark(records, *backend, config, bench_flags.prompt_template(), cache, options, &stats);
        if (!bench_label.empty()) report.system_label = bench_label;
        log("backend calls: " + std::to_string(stats.backend_calls) +
            ", cache hits: " + std::to_string(stats.cache_hits));
        reports.push_back(std::move(report));
      }
      detail::write_output(bench_report, render_reports(reports, detail::report_format(bench_format)), out);
      return kOk;
    }
  } catch (const BackendError& e) {
    err << "error: " << e.what() << '\n';
    return kBackendError;
  } catch (const MissingCorrectionsError& e) {
    err << "error: " << e.what() << '\n';
    return kBackendError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kOk;
}

}  // namespace capfix::cli
