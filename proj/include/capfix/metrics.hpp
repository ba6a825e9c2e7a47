#pragma once

#include <cmath>
#include <cstddef>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "capfix/alignment.hpp"
#include "capfix/error.hpp"
#include "capfix/text_norm.hpp"

namespace capfix {

inline Alignment align(const TokenStream& ref, const TokenStream& hyp) {
  return align(ref.view(), hyp.view());
}

/// Word error rate (S + D + I) / N with N the reference length. Not
/// symmetric: the first argument is the reference.
inline double wer(const AlignmentCounts& c) {
  if (c.ref_len == 0) throw Error(Errc::EmptyReference, "reference has no words");
  return static_cast<double>(c.errors()) / static_cast<double>(c.ref_len);
}

inline double wer(const TokenStream& ref, const TokenStream& hyp) { return wer(align(ref, hyp).counts); }

// ---------------------------------------------------------------------------
// BLEU

/// Clipped n-gram matches and hypothesis n-gram totals per order plus the
/// two lengths. Sums of these over a corpus give pooled BLEU.
struct BleuStats {
  std::vector<std::size_t> matches;
  std::vector<std::size_t> totals;
  std::size_t ref_len = 0;
  std::size_t hyp_len = 0;

  explicit BleuStats(std::size_t max_n = 4) : matches(max_n, 0), totals(max_n, 0) {}

  BleuStats& operator+=(const BleuStats& o) {
    for (std::size_t k = 0; k < matches.size() && k < o.matches.size(); ++k) {
      matches[k] += o.matches[k];
      totals[k] += o.totals[k];
    }
    ref_len += o.ref_len;
    hyp_len += o.hyp_len;
    return *this;
  }
};

inline BleuStats bleu_stats(const TokenStream& ref, const TokenStream& hyp, std::size_t max_n = 4) {
  if (max_n < 1) throw Error(Errc::InvalidOrder, "BLEU order must be >= 1");
  BleuStats st(max_n);
  st.ref_len = ref.size();
  st.hyp_len = hyp.size();
  for (std::size_t n = 1; n <= max_n; ++n) {
    const auto hyp_bag = ngrams(hyp, n);
    st.totals[n - 1] = hyp_bag.total();
    st.matches[n - 1] = clipped_overlap(hyp_bag, ngrams(ref, n));
  }
  return st;
}

/// Unsmoothed BLEU: geometric mean of the clipped precisions times the
/// brevity penalty. Orders for which the hypothesis has no n-grams are left
/// out of the mean; any included order with zero matches gives 0.
inline double bleu_from_stats(const BleuStats& st) {
  if (st.hyp_len == 0) return 0.0;
  double log_sum = 0.0;
  std::size_t orders = 0;
  for (std::size_t k = 0; k < st.totals.size(); ++k) {
    if (st.totals[k] == 0) continue;
    if (st.matches[k] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(st.matches[k]) / static_cast<double>(st.totals[k]));
    ++orders;
  }
  if (orders == 0) return 0.0;
  const double brevity =
      st.hyp_len < st.ref_len
          ? std::exp(1.0 - static_cast<double>(st.ref_len) / static_cast<double>(st.hyp_len))
          : 1.0;
  return std::exp(log_sum / static_cast<double>(orders)) * brevity;
}

inline double bleu(const TokenStream& ref, const TokenStream& hyp, std::size_t max_n = 4) {
  return bleu_from_stats(bleu_stats(ref, hyp, max_n));
}

// ---------------------------------------------------------------------------
// ROUGE

/// Overlap against the reference and hypothesis unit counts (n-grams for
/// ROUGE-N, tokens for ROUGE-L).
struct OverlapStats {
  std::size_t overlap = 0;
  std::size_t ref_total = 0;
  std::size_t hyp_total = 0;

  OverlapStats& operator+=(const OverlapStats& o) noexcept {
    overlap += o.overlap;
    ref_total += o.ref_total;
    hyp_total += o.hyp_total;
    return *this;
  }
};

/// Recall is the headline figure; precision and F1 are kept alongside.
struct RougeScore {
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;

  friend bool operator==(const RougeScore&, const RougeScore&) = default;
};

inline RougeScore rouge_from_stats(const OverlapStats& st) {
  RougeScore s;
  if (st.ref_total > 0) s.recall = static_cast<double>(st.overlap) / static_cast<double>(st.ref_total);
  if (st.hyp_total > 0) s.precision = static_cast<double>(st.overlap) / static_cast<double>(st.hyp_total);
  if (s.recall + s.precision > 0.0) s.f1 = 2.0 * s.recall * s.precision / (s.recall + s.precision);
  return s;
}

inline OverlapStats rouge_n_stats(const TokenStream& ref, const TokenStream& hyp, std::size_t n) {
  const auto ref_bag = ngrams(ref, n);
  const auto hyp_bag = ngrams(hyp, n);
  return {clipped_overlap(ref_bag, hyp_bag), ref_bag.total(), hyp_bag.total()};
}

inline OverlapStats rouge_l_stats(const TokenStream& ref, const TokenStream& hyp) {
  return {lcs_length(ref.view(), hyp.view()), ref.size(), hyp.size()};
}

inline RougeScore rouge_n_score(const TokenStream& ref, const TokenStream& hyp, std::size_t n) {
  return rouge_from_stats(rouge_n_stats(ref, hyp, n));
}

inline RougeScore rouge_l_score(const TokenStream& ref, const TokenStream& hyp) {
  return rouge_from_stats(rouge_l_stats(ref, hyp));
}

/// ROUGE-N recall: clipped n-gram overlap over reference n-gram count.
inline double rouge_n(const TokenStream& ref, const TokenStream& hyp, std::size_t n) {
  return rouge_n_score(ref, hyp, n).recall;
}

/// ROUGE-L recall: LCS length over reference length.
inline double rouge_l(const TokenStream& ref, const TokenStream& hyp) { return rouge_l_score(ref, hyp).recall; }

// ---------------------------------------------------------------------------
// Composite report

struct MetricPolicies {
  TokenPolicy wer = kWerPolicy;
  TokenPolicy bleu = kBleuPolicy;
  TokenPolicy rouge = kRougePolicy;
};

/// Sufficient statistics of one reference/hypothesis pair.
struct PairStats {
  AlignmentCounts counts;
  BleuStats bleu;
  OverlapStats rouge1;
  OverlapStats rouge2;
  OverlapStats rougeL;

  PairStats& operator+=(const PairStats& o) {
    counts += o.counts;
    bleu += o.bleu;
    rouge1 += o.rouge1;
    rouge2 += o.rouge2;
    rougeL += o.rougeL;
    return *this;
  }
};

struct MetricReport {
  double wer = 0.0;
  double bleu = 0.0;
  RougeScore rouge1;
  RougeScore rouge2;
  RougeScore rougeL;
  AlignmentCounts counts;

  friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

inline PairStats pair_stats(std::string_view ref_text, std::string_view hyp_text, const MetricPolicies& p = {}) {
  PairStats st;
  st.counts = align(tokenize(ref_text, p.wer), tokenize(hyp_text, p.wer)).counts;
  st.bleu = bleu_stats(tokenize(ref_text, p.bleu), tokenize(hyp_text, p.bleu));
  const auto ref = tokenize(ref_text, p.rouge);
  const auto hyp = tokenize(hyp_text, p.rouge);
  st.rouge1 = rouge_n_stats(ref, hyp, 1);
  st.rouge2 = rouge_n_stats(ref, hyp, 2);
  st.rougeL = rouge_l_stats(ref, hyp);
  return st;
}

inline MetricReport report_from_stats(const PairStats& st) {
  MetricReport r;
  r.counts = st.counts;
  r.wer = wer(st.counts);
  r.bleu = bleu_from_stats(st.bleu);
  r.rouge1 = rouge_from_stats(st.rouge1);
  r.rouge2 = rouge_from_stats(st.rouge2);
  r.rougeL = rouge_from_stats(st.rougeL);
  return r;
}

/// Scores a hypothesis caption against its ground truth, each metric under
/// its own tokenization policy. Throws EmptyReference when the reference
/// has no words under the WER policy.
inline MetricReport evaluate_pair(std::string_view ref_text, std::string_view hyp_text,
                                  const MetricPolicies& policies = {}) {
  return report_from_stats(pair_stats(ref_text, hyp_text, policies));
}

// ---------------------------------------------------------------------------
// JSON: flat object {wer, bleu, rouge1, rouge2, rougeL, s, d, i, n} plus the
// ROUGE precision/F1 companions.

inline void to_json(nlohmann::json& j, const MetricReport& r) {
  j = nlohmann::json{{"wer", r.wer},
                     {"bleu", r.bleu},
                     {"rouge1", r.rouge1.recall},
                     {"rouge2", r.rouge2.recall},
                     {"rougeL", r.rougeL.recall},
                     {"s", r.counts.substitutions},
                     {"d", r.counts.deletions},
                     {"i", r.counts.insertions},
                     {"n", r.counts.ref_len},
                     {"rouge1_precision", r.rouge1.precision},
                     {"rouge1_f1", r.rouge1.f1},
                     {"rouge2_precision", r.rouge2.precision},
                     {"rouge2_f1", r.rouge2.f1},
                     {"rougeL_precision", r.rougeL.precision},
                     {"rougeL_f1", r.rougeL.f1}};
}

inline void from_json(const nlohmann::json& j, MetricReport& r) {
  r.wer = j.at("wer").get<double>();
  r.bleu = j.at("bleu").get<double>();
  r.rouge1 = {j.at("rouge1").get<double>(), j.value("rouge1_precision", 0.0), j.value("rouge1_f1", 0.0)};
  r.rouge2 = {j.at("rouge2").get<double>(), j.value("rouge2_precision", 0.0), j.value("rouge2_f1", 0.0)};
  r.rougeL = {j.at("rougeL").get<double>(), j.value("rougeL_precision", 0.0), j.value("rougeL_f1", 0.0)};
  r.counts.substitutions = j.at("s").get<std::size_t>();
  r.counts.deletions = j.at("d").get<std::size_t>();
  r.counts.insertions = j.at("i").get<std::size_t>();
  r.counts.ref_len = j.at("n").get<std::size_t>();
  r.counts.matches = r.counts.ref_len - r.counts.substitutions - r.counts.deletions;
}

}  // namespace capfix
