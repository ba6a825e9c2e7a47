#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "capfix/metrics.hpp"
#include "support/oracles.hpp"

namespace capfix {
namespace {

constexpr const char* kFoxRef = "The quick brown fox jumps over the lazy dog.";
constexpr const char* kFoxHyp = "The quick brown fox leaps over the lazy dog.";

TokenStream words(std::vector<std::string> w) { return TokenStream{std::move(w), kWerPolicy}; }

void expect_consistent(const Alignment& a, std::size_t ref_len, std::size_t hyp_len) {
  const auto& c = a.counts;
  EXPECT_EQ(c.matches + c.substitutions + c.deletions, ref_len);
  EXPECT_EQ(c.matches + c.substitutions + c.insertions, hyp_len);
  EXPECT_EQ(c.ref_len, ref_len);
  // The path witnesses the counts and consumes both streams in order.
  std::size_t next_ref = 0, next_hyp = 0;
  AlignmentCounts from_path;
  from_path.ref_len = ref_len;
  for (const auto& s : a.path) {
    switch (s.op) {
      case EditOp::Match: ++from_path.matches; break;
      case EditOp::Substitute: ++from_path.substitutions; break;
      case EditOp::Delete: ++from_path.deletions; break;
      case EditOp::Insert: ++from_path.insertions; break;
    }
    if (s.ref != kNoIndex) { EXPECT_EQ(s.ref, next_ref++); }
    if (s.hyp != kNoIndex) { EXPECT_EQ(s.hyp, next_hyp++); }
  }
  EXPECT_EQ(next_ref, ref_len);
  EXPECT_EQ(next_hyp, hyp_len);
  EXPECT_EQ(from_path, c);
}

TEST(Align, FoxSingleSubstitution) {
  const auto a = align(tokenize(kFoxRef, kWerPolicy), tokenize(kFoxHyp, kWerPolicy));
  EXPECT_EQ(a.counts.substitutions, 1u);
  EXPECT_EQ(a.counts.deletions, 0u);
  EXPECT_EQ(a.counts.insertions, 0u);
  EXPECT_EQ(a.counts.ref_len, 9u);
  EXPECT_EQ(a.path[4], (AlignStep{EditOp::Substitute, 4, 4}));
}

TEST(Align, IdentityAndTotalDeletion) {
  const auto x = words({"a", "b", "c"});
  const auto same = align(x, x);
  EXPECT_EQ(same.counts.matches, 3u);
  EXPECT_EQ(same.counts.errors(), 0u);

  const auto gone = align(x, words({}));
  EXPECT_EQ(gone.counts.deletions, 3u);
  EXPECT_EQ(gone.counts.substitutions + gone.counts.insertions, 0u);
  EXPECT_EQ(align(words({}), words({})).path.size(), 0u);
}

TEST(Align, TieBreakPrefersDiagonalThenDeletion) {
  // ref [a,b] hyp [c]: both SUB+DEL orders cost 2; the backtrace takes the
  // diagonal at the end first.
  const auto a = align(words({"a", "b"}), words({"c"}));
  ASSERT_EQ(a.path.size(), 2u);
  EXPECT_EQ(a.path[0].op, EditOp::Delete);
  EXPECT_EQ(a.path[1], (AlignStep{EditOp::Substitute, 1, 0}));
  // ref [a] hyp [b]: SUB (1) beats DEL+INS (2).
  EXPECT_EQ(align(words({"a"}), words({"b"})).path.front().op, EditOp::Substitute);
  // Deterministic.
  EXPECT_EQ(align(words({"a", "b", "a"}), words({"b", "a", "b"})).path,
            align(words({"a", "b", "a"}), words({"b", "a", "b"})).path);
}

TEST(Align, CountsIdentitiesProperty) {
  std::mt19937 rng(42);
  for (int trial = 0; trial < 300; ++trial) {
    const auto r = oracle::random_words(rng, 0, 15, 4);
    const auto h = oracle::random_words(rng, 0, 15, 4);
    expect_consistent(align(r, h), r.size(), h.size());
  }
}

TEST(Wer, Fox) {
  EXPECT_DOUBLE_EQ(wer(tokenize(kFoxRef, kWerPolicy), tokenize(kFoxHyp, kWerPolicy)), 1.0 / 9.0);
}

TEST(Wer, IdentityEmptyAndInsertionHeavy) {
  EXPECT_EQ(wer(words({"a", "b"}), words({"a", "b"})), 0.0);
  // one substitution + one insertion over N = 1
  EXPECT_DOUBLE_EQ(wer(words({"a"}), words({"b", "c"})), 2.0);
  try {
    wer(words({}), words({"a"}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptyReference);
  }
}

TEST(Wer, FirstArgumentIsReference) {
  const auto a = words({"a", "b", "c", "d"});
  const auto b = words({"a", "b"});
  EXPECT_DOUBLE_EQ(wer(a, b), 2.0 / 4.0);
  EXPECT_DOUBLE_EQ(wer(b, a), 2.0 / 2.0);
}

TEST(Wer, SingleSubstitutionIsOneOverN) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    auto r = oracle::random_words(rng, 1, 20, 8);
    auto h = r;
    const auto at = std::uniform_int_distribution<std::size_t>(0, r.size() - 1)(rng);
    h[at] = "zzz";
    EXPECT_DOUBLE_EQ(wer(words(r), words(h)), 1.0 / static_cast<double>(r.size()));
  }
}

TEST(Wer, MatchesExhaustiveRecursion) {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 150; ++trial) {
    const auto r = oracle::random_words(rng, 1, 7, 4);
    const auto h = oracle::random_words(rng, 0, 7, 4);
    EXPECT_EQ(align(r, h).counts.errors(), oracle::edit_distance(r, h));
  }
}

TEST(Bleu, FoxUnsmoothed) {
  const auto ref = tokenize(kFoxRef, kBleuPolicy);
  const auto hyp = tokenize(kFoxHyp, kBleuPolicy);
  const auto st = bleu_stats(ref, hyp);
  EXPECT_EQ(st.matches, (std::vector<std::size_t>{9, 7, 5, 3}));
  EXPECT_EQ(st.totals, (std::vector<std::size_t>{10, 9, 8, 7}));
  // (9/10 * 7/9 * 5/8 * 3/7)^(1/4) = (3/16)^(1/4)
  EXPECT_NEAR(bleu(ref, hyp), 0.6580370064762462, 1e-12);
}

TEST(Bleu, IdentityDisjointEmptyAndBrevity) {
  const auto x = tokenize("a b c d e", kBleuPolicy);
  EXPECT_DOUBLE_EQ(bleu(x, x), 1.0);
  EXPECT_EQ(bleu(x, tokenize("v w x y z", kBleuPolicy)), 0.0);
  EXPECT_EQ(bleu(x, tokenize("", kBleuPolicy)), 0.0);
  // Every precision is 1; penalty exp(1 - 6/4).
  EXPECT_NEAR(bleu(tokenize("a b c d e f", kBleuPolicy), tokenize("a b c d", kBleuPolicy)), 0.6065306597126334,
              1e-12);
  // A three-token identical pair has no 4-grams; that order is left out.
  const auto short_x = tokenize("a b c", kBleuPolicy);
  EXPECT_DOUBLE_EQ(bleu(short_x, short_x), 1.0);
}

TEST(Bleu, MatchesStraightLineOracle) {
  std::mt19937 rng(1234);
  for (int trial = 0; trial < 300; ++trial) {
    const auto r = oracle::random_words(rng, 1, 12, 3);
    const auto h = oracle::random_words(rng, 0, 12, 3);
    const double got = bleu(words(r), words(h));
    EXPECT_NEAR(got, oracle::bleu(r, h), 1e-12);
    EXPECT_GE(got, 0.0);
    EXPECT_LE(got, 1.0 + 1e-12);
  }
}

TEST(Rouge, Fox) {
  const auto ref = tokenize(kFoxRef, kRougePolicy);
  const auto hyp = tokenize(kFoxHyp, kRougePolicy);
  EXPECT_DOUBLE_EQ(rouge_n(ref, hyp, 1), 8.0 / 9.0);
  EXPECT_DOUBLE_EQ(rouge_n(ref, hyp, 2), 6.0 / 8.0);
  EXPECT_DOUBLE_EQ(rouge_l(ref, hyp), 8.0 / 9.0);
  // Equal lengths: F1 equals recall here.
  EXPECT_DOUBLE_EQ(rouge_n_score(ref, hyp, 1).f1, 8.0 / 9.0);
}

TEST(Rouge, IdentityDisjointAndOrder) {
  const auto x = words({"a", "b", "c"});
  for (std::size_t n = 1; n <= 3; ++n) EXPECT_DOUBLE_EQ(rouge_n(x, x, n), 1.0);
  EXPECT_EQ(rouge_n(x, x, 4), 0.0);  // reference has no 4-grams
  EXPECT_DOUBLE_EQ(rouge_l(x, x), 1.0);
  EXPECT_EQ(rouge_l(x, words({"d", "e"})), 0.0);
  EXPECT_EQ(rouge_l(words({}), x), 0.0);
  EXPECT_THROW(rouge_n(x, x, 0), Error);
}

TEST(Rouge, MatchesRecursiveOracles) {
  std::mt19937 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const auto r = oracle::random_words(rng, 1, 9, 3);
    const auto h = oracle::random_words(rng, 0, 9, 3);
    EXPECT_DOUBLE_EQ(rouge_l(words(r), words(h)), double(oracle::lcs(r, h)) / double(r.size()));
    for (std::size_t n = 1; n <= 2; ++n) {
      const auto ref_n = oracle::ngram_count(r, n);
      const double expected = ref_n ? double(oracle::clipped_matches(r, h, n)) / double(ref_n) : 0.0;
      EXPECT_DOUBLE_EQ(rouge_n(words(r), words(h), n), expected);
    }
  }
}

TEST(EvaluatePair, FoxReport) {
  const auto r = evaluate_pair(kFoxRef, kFoxHyp);
  EXPECT_DOUBLE_EQ(r.wer, 1.0 / 9.0);
  EXPECT_NEAR(r.bleu, 0.66, 0.01);
  EXPECT_NEAR(r.rouge1.recall, 0.89, 0.01);
  EXPECT_DOUBLE_EQ(r.rouge2.recall, 0.75);
  EXPECT_NEAR(r.rougeL.recall, 0.89, 0.01);
  EXPECT_EQ(r.counts, (AlignmentCounts{1, 0, 0, 8, 9}));
}

TEST(EvaluatePair, PerfectAndEmptyReference) {
  const auto r = evaluate_pair("a", "a");
  EXPECT_EQ(r.wer, 0.0);
  EXPECT_EQ(r.bleu, 1.0);
  EXPECT_EQ(r.rouge1.recall, 1.0);
  EXPECT_EQ(r.rouge2.recall, 0.0);  // one-word reference has no bigrams
  EXPECT_EQ(r.rougeL.recall, 1.0);
  EXPECT_THROW(evaluate_pair("...", "a"), Error);
}

TEST(EvaluatePair, JsonIsFlatAndRoundTrips) {
  const auto r = evaluate_pair(kFoxRef, "The brown fox leaps over the the lazy dog");
  const nlohmann::json j = r;
  for (const char* k : {"wer", "bleu", "rouge1", "rouge2", "rougeL", "s", "d", "i", "n"}) {
    ASSERT_TRUE(j.contains(k)) << k;
    EXPECT_TRUE(j[k].is_number());
  }
  EXPECT_EQ(j.get<MetricReport>(), r);
  EXPECT_EQ(nlohmann::json::parse(j.dump()).get<MetricReport>(), r);
}

}  // namespace
}  // namespace capfix
