#include <gtest/gtest.h>

#include <cmath>

#include "bhavnet/metrics.hpp"
#include "bhavnet/rng.hpp"
#include "oracles.hpp"

using namespace bhavnet;

TEST(Metrics, WorkedExample) {
  const std::vector<int> pred{1, 1, 0, 0}, gold{1, 0, 0, 0};
  const EvalReport r = score(pred, gold);
  EXPECT_DOUBLE_EQ(r.per_class[1].precision, 0.5);
  EXPECT_DOUBLE_EQ(r.per_class[1].recall, 1.0);
  EXPECT_NEAR(r.per_class[1].f1, 2.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(r.per_class[0].precision, 1.0);
  EXPECT_NEAR(r.per_class[0].recall, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.per_class[0].f1, 0.8, 1e-15);
  EXPECT_NEAR(r.macro_f1, 0.7333, 1e-4);
  EXPECT_NEAR(r.macro_f1, 0.733333333333, 1e-12);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.75);
  EXPECT_EQ(r.counts, (ConfusionCounts{1, 1, 2, 0}));
}

TEST(Metrics, PerfectPredictions) {
  const std::vector<int> y{0, 1, 1, 0, 1};
  const EvalReport r = score(y, y);
  EXPECT_EQ(r.macro_f1, 1.0);
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.per_class[0].f1, 1.0);
  EXPECT_EQ(r.zero_division, 0u);
}

TEST(Metrics, AllOnesOnBalancedData) {
  const std::vector<int> pred(6, 1), gold{0, 1, 0, 1, 0, 1};
  const EvalReport r = score(pred, gold);
  EXPECT_EQ(r.per_class[0].f1, 0.0);
  EXPECT_FALSE(std::isnan(r.per_class[0].precision));
  EXPECT_GT(r.zero_division, 0u);
  EXPECT_NEAR(r.macro_f1, 0.5 * r.per_class[1].f1, 1e-15);
  EXPECT_NEAR(r.per_class[1].f1, 2.0 / 3.0, 1e-15);
}

TEST(Metrics, ThresholdTieIsAntonym) {
  EXPECT_EQ(threshold_label(0.5), 1);
  EXPECT_EQ(threshold_label(std::nextafter(0.5, 0.0)), 0);
}

TEST(Metrics, MatchesConfusionOracleOnRandomVectors) {
  Rng rng(77);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(60);
    const double bias = rng.uniform();
    std::vector<int> pred(n), gold(n);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = rng.bernoulli(bias) ? 1 : 0;
      gold[i] = static_cast<int>(rng.below(2));
    }
    const oracle::Counts c = oracle::count_confusion(pred, gold);
    const EvalReport r = score(pred, gold);
    ASSERT_EQ(r.counts.tp, static_cast<std::size_t>(c.tp));
    ASSERT_EQ(r.counts.fp, static_cast<std::size_t>(c.fp));
    ASSERT_EQ(r.counts.tn, static_cast<std::size_t>(c.tn));
    ASSERT_EQ(r.counts.fn, static_cast<std::size_t>(c.fn));
    ASSERT_EQ(r.macro_f1, oracle::macro_f1(c)) << "trial " << trial;
    ASSERT_EQ(r.accuracy, static_cast<double>(c.tp + c.tn) / static_cast<double>(n));
    ASSERT_FALSE(std::isnan(r.macro_f1));
  }
}

TEST(Metrics, CountsMergeAssociatively) {
  ConfusionCounts a{1, 2, 3, 4}, b{5, 0, 1, 2};
  ConfusionCounts sum = a;
  sum += b;
  EXPECT_EQ(sum, (ConfusionCounts{6, 2, 4, 6}));
  EXPECT_EQ(report_from_counts(sum).accuracy, 10.0 / 18.0);
}

TEST(Metrics, ReportFormatNamesFields) {
  const std::string text = format_report(score(std::vector<int>{1, 0}, std::vector<int>{1, 1}));
  for (const char* key : {"macro_f1", "accuracy", "precision", "recall"}) EXPECT_NE(text.find(key), std::string::npos) << text;
}
