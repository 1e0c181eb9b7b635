// Copyright 2026 The mlcrf Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace mlcrf;

namespace {

confusion_counts counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
  confusion_counts c(2);
  c.tp[1] = tp;
  c.fp[1] = fp;
  c.fn[1] = fn;
  return c;
}

label_field filled(std::size_t n, std::uint8_t v) {
  return label_field(n, 1, std::vector<std::uint8_t>(n, v));
}

}  // namespace

TEST(Accumulate, PerfectWastePrediction) {
  const auto c = accumulate(filled(10, 1), filled(10, 1), confusion_counts(2));
  EXPECT_EQ(c.tp[1], 10u);
  EXPECT_EQ(c.fp[1], 0u);
  EXPECT_EQ(c.fn[1], 0u);
}

TEST(Accumulate, AllWrongWaste) {
  const auto c = accumulate(filled(10, 1), filled(10, 0), confusion_counts(2));
  EXPECT_EQ(c.fp[1], 10u);
  EXPECT_EQ(c.fn[0], 10u);
  EXPECT_EQ(c.tp[0] + c.tp[1], 0u);
}

TEST(Accumulate, RandomPairsMatchTally) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    const auto p = oracle::random_mask(rng, 8, 8, 0.4), g = oracle::random_mask(rng, 8, 8, 0.4);
    const auto c = accumulate(p, g, confusion_counts(2));
    const oracle::tally o({{p, g}}, 2);
    for (std::size_t k = 0; k < 2; ++k) {
      EXPECT_EQ(c.tp[k], o.tp(k));
      EXPECT_EQ(c.fp[k], o.fp(k));
      EXPECT_EQ(c.fn[k], o.fn(k));
    }
  }
}

TEST(Accumulate, RejectsMismatches) {
  EXPECT_THROW(accumulate(filled(3, 0), filled(4, 0), confusion_counts(2)), dimension_error);
  EXPECT_THROW(accumulate(filled(3, 2), filled(3, 0), confusion_counts(2)), mlcrf::invalid_argument);
}

TEST(Ratios, KnownArithmetic) {
  const auto c = counts(8, 2, 2);
  EXPECT_NEAR(iou(c, 1), 0.6667, 1e-4);
  EXPECT_DOUBLE_EQ(iou(c, 1), 8.0 / 12.0);
  EXPECT_DOUBLE_EQ(precision(c, 1), 0.8);
}

TEST(Ratios, PerfectPredictionScoresOne) {
  const auto c = accumulate(label_field(4, 1, {0, 1, 1, 0}), label_field(4, 1, {0, 1, 1, 0}),
                            confusion_counts(2));
  const auto r = summarize(c);
  EXPECT_EQ(r.iou, 1.0);
  EXPECT_EQ(r.miou, 1.0);
  EXPECT_EQ(r.prec, 1.0);
  EXPECT_EQ(r.mean, 1.0);
}

TEST(Ratios, ZeroDenominatorConventions) {
  // Waste absent everywhere: vacuously perfect.
  const auto absent = accumulate(filled(5, 0), filled(5, 0), confusion_counts(2));
  EXPECT_EQ(iou(absent, 1), 1.0);
  EXPECT_EQ(precision(absent, 1), 1.0);
  // Predicted but absent from truth: zero.
  const auto spurious = accumulate(filled(5, 1), filled(5, 0), confusion_counts(2));
  EXPECT_EQ(iou(spurious, 1), 0.0);
  EXPECT_EQ(precision(spurious, 1), 0.0);
  // Present but never predicted: zero.
  const auto missed = accumulate(filled(5, 0), filled(5, 1), confusion_counts(2));
  EXPECT_EQ(iou(missed, 1), 0.0);
  EXPECT_EQ(precision(missed, 1), 0.0);
}

TEST(Ratios, DatasetLevelAggregationMatchesTallyAndBounds) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> dim(1, 20);
  std::uniform_real_distribution<double> dens(0.0, 1.0);
  for (int t = 0; t < 40; ++t) {
    std::vector<std::pair<label_field, label_field>> pairs;
    confusion_counts c(2);
    for (int img = 0; img < 5; ++img) {
      const auto w = static_cast<std::size_t>(dim(rng)), h = static_cast<std::size_t>(dim(rng));
      pairs.emplace_back(oracle::random_mask(rng, w, h, dens(rng)), oracle::random_mask(rng, w, h, dens(rng)));
      c = accumulate(pairs.back().first, pairs.back().second, c);
    }
    const oracle::tally o(pairs, 2);
    const auto r = summarize(c);
    EXPECT_NEAR(r.iou, o.iou(1), 1e-12);
    EXPECT_NEAR(r.miou, o.miou(), 1e-12);
    EXPECT_NEAR(r.prec, o.prec(1), 1e-12);
    EXPECT_NEAR(r.mean, o.mean(), 1e-12);
    for (std::size_t k = 0; k < 2; ++k) {
      EXPECT_GE(iou(c, k), 0.0);
      EXPECT_LE(iou(c, k), precision(c, k));
      EXPECT_LE(precision(c, k), 1.0);
    }
    // Image order does not matter.
    confusion_counts rev(2);
    for (auto it = pairs.rbegin(); it != pairs.rend(); ++it) rev = accumulate(it->first, it->second, rev);
    EXPECT_EQ(rev, c);
  }
}

TEST(Ratios, MergingPartialCountsIsAssociative) {
  std::mt19937_64 rng(3);
  confusion_counts whole(2), a(2), b(2);
  for (int i = 0; i < 6; ++i) {
    const auto p = oracle::random_mask(rng, 9, 9, 0.5), g = oracle::random_mask(rng, 9, 9, 0.5);
    whole = accumulate(p, g, whole);
    (i % 2 ? a : b) = accumulate(p, g, i % 2 ? a : b);
  }
  a += b;
  EXPECT_EQ(a, whole);
}

TEST(Report, TableAndJsonLayout) {
  const auto r = summarize(counts(8, 2, 2));
  const auto table = format_table(r);
  EXPECT_EQ(table.substr(0, table.find('\n')), "IoU\tmIoU\tPrec\tMean");
  EXPECT_NE(table.find("66.67"), std::string::npos);
  const auto j = to_json(r);
  EXPECT_NEAR(j["IoU"].get<double>(), 8.0 / 12.0, 1e-12);
  EXPECT_EQ(j["classes"].size(), 2u);
  EXPECT_EQ(j["classes"][1]["tp"].get<int>(), 8);
}
