// Copyright 2026 The l2v Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <functional>

#include "gtest/gtest.h"
#include "l2v/metrics.hpp"
#include "oracles.hpp"

namespace l2v {
namespace {

using Words = std::vector<std::string>;

// Plain recursion over the three edit moves; exponential but exact.
int brute_force_distance(const Words& hyp, const Words& ref, std::size_t i = 0, std::size_t j = 0) {
  if (i == ref.size()) return static_cast<int>(hyp.size() - j);
  if (j == hyp.size()) return static_cast<int>(ref.size() - i);
  const int sub = brute_force_distance(hyp, ref, i + 1, j + 1) + (ref[i] == hyp[j] ? 0 : 1);
  const int del = brute_force_distance(hyp, ref, i + 1, j) + 1;
  const int ins = brute_force_distance(hyp, ref, i, j + 1) + 1;
  return std::min({sub, del, ins});
}

Words words_of(const Labels& symbols) {
  Words w;
  for (int s : symbols) w.push_back(std::string(1, static_cast<char>('a' + s)));
  return w;
}

TEST(TokenizeTest, SplitsOnSingleSpaces) {
  EXPECT_EQ(tokenize("a bb c"), (Words{"a", "bb", "c"}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_EQ(tokenize("A a"), (Words{"A", "a"}));
}

TEST(EditDistanceTest, UnitCases) {
  EXPECT_EQ(edit_distance("a b c", "a b c"), (EditCounts{0, 0, 0}));
  EXPECT_EQ(edit_distance("", "w x y z"), (EditCounts{0, 4, 0}));
  EXPECT_EQ(edit_distance("a x c", "a b c"), (EditCounts{1, 0, 0}));
  EXPECT_EQ(edit_distance("a b c d", "a b c"), (EditCounts{0, 0, 1}));
}

TEST(EditDistanceTest, PrefersSubstitutionOnTies) {
  // "x" vs "y z": one substitution plus one deletion either way; S is taken first.
  const EditCounts c = edit_distance("x", "y z");
  EXPECT_EQ(c.errors(), 2);
  EXPECT_EQ(c.substitutions, 1);
  EXPECT_EQ(c.deletions, 1);
}

TEST(EditDistanceTest, ExhaustiveSweepMatchesBruteForce) {
  int checked = 0;
  for (int hl = 0; hl <= 4; ++hl) {
    for (int rl = 0; rl <= 4; ++rl) {
      oracle::for_each_sequence(hl, 0, 3, [&](const Labels& h) {
        oracle::for_each_sequence(rl, 0, 3, [&](const Labels& r) {
          const Words hw = words_of(h), rw = words_of(r);
          const EditCounts c = edit_distance(hw, rw);
          ASSERT_EQ(c.errors(), brute_force_distance(hw, rw));
          // Counts must describe an alignment of these lengths.
          ASSERT_EQ(static_cast<int>(hw.size()) - static_cast<int>(rw.size()), c.insertions - c.deletions);
          ++checked;
        });
      });
    }
  }
  EXPECT_GT(checked, 10000);
}

TEST(EditDistanceTest, TriangleWithConcatenation) {
  for (int n = 0; n <= 3; ++n) {
    oracle::for_each_sequence(n, 0, 2, [&](const Labels& a) {
      oracle::for_each_sequence(n, 0, 2, [&](const Labels& b) {
        const Words x = words_of(a), y = words_of(b);
        Words xx = x, yy = y;
        xx.insert(xx.end(), x.begin(), x.end());
        yy.insert(yy.end(), y.begin(), y.end());
        EXPECT_LE(edit_distance(xx, yy).errors(), 2 * edit_distance(x, y).errors());
      });
    });
  }
}

TEST(WerTest, UnitCases) {
  EXPECT_EQ(wer("a b c", "a b c"), 0.0);
  EXPECT_EQ(wer("", "a b c d"), 1.0);
  EXPECT_EQ(wer("a x c", "a b c"), 1.0 / 3.0);
  EXPECT_EQ(wer("a b c d e", "a"), 4.0);
  EXPECT_THROW(wer("a", ""), std::invalid_argument);
}

TEST(WerTest, InvariantToSharedContext) {
  const std::vector<std::pair<std::string, std::string>> cases{
      {"a b", "a c d"}, {"", "x"}, {"p q r", "r q p"}};
  for (const auto& [h, r] : cases) {
    const double base = static_cast<double>(edit_distance(h, r).errors());
    const std::string hh = "s t " + h + (h.empty() ? "" : " ") + "u";
    const std::string rr = "s t " + r + " u";
    EXPECT_EQ(static_cast<double>(edit_distance(hh, rr).errors()), base);
  }
}

TEST(RankMetricTest, ReferenceRow) {
  // 0.26 mean and 0.29 spread give a rank of 33.5 in percentage points.
  EXPECT_NEAR(100.0 * rank_metric(0.26, 0.29), 33.5, 0.05);
  EXPECT_DOUBLE_EQ(rank_metric(0.26, 0.29), 0.26 * 1.29);
}

UtteranceScore planted(const std::string& id, int errors, int words, double duration) {
  UtteranceScore s;
  s.id = id;
  s.counts.substitutions = errors;
  s.ref_words = words;
  s.duration = duration;
  return s;
}

TEST(CorpusStatsTest, PlantedCorpusReproducesReferenceMoments) {
  // 2 x 0/10, 5 x 1/10 and 3 x 7/10 errors: mean 0.26, spread 0.2905.
  std::vector<UtteranceScore> scores;
  for (int i = 0; i < 2; ++i) scores.push_back(planted("z" + std::to_string(i), 0, 10, 1.0));
  for (int i = 0; i < 5; ++i) scores.push_back(planted("o" + std::to_string(i), 1, 10, 3.0));
  for (int i = 0; i < 3; ++i) scores.push_back(planted("s" + std::to_string(i), 7, 10, 5.0));
  const WERReport r = corpus_stats(scores);
  EXPECT_NEAR(r.wer, 0.26, 1e-15);
  const double sigma = std::sqrt((2 * 0.26 * 0.26 + 5 * 0.16 * 0.16 + 3 * 0.44 * 0.44) / 10.0);
  EXPECT_NEAR(r.sigma, sigma, 1e-15);
  EXPECT_NEAR(std::round(100 * r.sigma) / 100, 0.29, 1e-12);
  EXPECT_DOUBLE_EQ(r.rank, r.wer * (1 + r.sigma));
}

TEST(CorpusStatsTest, TwoUtteranceWeightedMoments) {
  const WERReport r = corpus_stats({planted("a", 1, 4, 1.0), planted("b", 3, 2, 1.0)});
  const double mu = 4.0 / 6.0;
  const double var = (4 * std::pow(0.25 - mu, 2) + 2 * std::pow(1.5 - mu, 2)) / 6.0;
  EXPECT_NEAR(r.wer, mu, 1e-15);
  EXPECT_NEAR(r.sigma, std::sqrt(var), 1e-15);
  EXPECT_GE(r.rank, r.wer);
}

TEST(CorpusStatsTest, IdenticalUtterancesHaveZeroSpread) {
  const WERReport r = corpus_stats({planted("a", 1, 5, 1.0), planted("b", 2, 10, 1.0)});
  EXPECT_NEAR(r.sigma, 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(r.rank, r.wer);
  EXPECT_THROW(corpus_stats({}), std::invalid_argument);
  EXPECT_THROW(corpus_stats({planted("e", 0, 0, 1.0)}), std::invalid_argument);
}

TEST(BucketTest, SingleUtteranceFillsOneBucket) {
  const std::vector<UtteranceScore> s{planted("a", 1, 4, 3.0)};
  const auto b = bucket_by_length(s);
  ASSERT_EQ(b.size(), 4u);
  EXPECT_FALSE(b[0]);
  ASSERT_TRUE(b[1]);
  EXPECT_EQ(b[1]->label(), "[2,4)");
  EXPECT_FALSE(b[2]);
  EXPECT_FALSE(b[3]);
}

TEST(BucketTest, PlantedRatesAreRecoveredAndPartitionWords) {
  const std::vector<double> rates{0.1, 0.25, 0.5, 0.75};
  const std::vector<double> durations{1.0, 2.0, 5.9, 6.0};
  std::vector<UtteranceScore> s;
  int total_words = 0;
  for (std::size_t b = 0; b < 4; ++b) {
    for (int k = 1; k <= 3; ++k) {
      const int words = 4 * k * 5;
      s.push_back(planted("u", static_cast<int>(rates[b] * words), words, durations[b] + 0.01 * (k - 1)));
      total_words += words;
    }
  }
  const auto buckets = bucket_by_length(s);
  int sum = 0;
  for (std::size_t b = 0; b < 4; ++b) {
    ASSERT_TRUE(buckets[b]);
    EXPECT_NEAR(buckets[b]->wer(), rates[b], 1e-12);
    sum += buckets[b]->ref_words;
  }
  EXPECT_EQ(sum, total_words);
  EXPECT_EQ(buckets[3]->label(), "[6,inf)");
  s.push_back(planted("neg", 0, 1, -1.0));
  EXPECT_THROW(bucket_by_length(s), std::invalid_argument);
}

TEST(ReportTest, JsonRoundTrip) {
  const WERReport r = corpus_stats({score_utterance("a", "x y", "x z", 1.5), score_utterance("b", "", "q", 4.5)});
  const nlohmann::json j = to_json(r);
  EXPECT_EQ(j.at("wer").get<double>(), r.wer);
  EXPECT_TRUE(j.at("buckets").contains("[0,2)"));
  EXPECT_FALSE(j.at("buckets").contains("[2,4)"));
  const WERReport back = report_from_json(j);
  EXPECT_EQ(to_json(back), j);
}

}  // namespace
}  // namespace l2v
