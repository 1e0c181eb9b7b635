// Copyright 2026 The mlcrf Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <numbers>

#include "oracles.hpp"

using namespace mlcrf;

namespace {

probability_field single(float a, float b) { return probability_field(1, 1, 2, {a, b}); }

}  // namespace

TEST(Softmax, EqualLogitsGiveHalf) {
  const auto p = softmax(logit_field(1, 1, 2, {0.0, 0.0}));
  EXPECT_FLOAT_EQ(p(0, 0, 0), 0.5f);
  EXPECT_FLOAT_EQ(p(0, 0, 1), 0.5f);
}

TEST(Softmax, LogThreeGivesQuarterAndThreeQuarters) {
  const auto p = softmax(logit_field(1, 1, 2, {0.0, std::log(3.0)}));
  EXPECT_NEAR(p(0, 0, 0), 0.25, 1e-6);
  EXPECT_NEAR(p(0, 0, 1), 0.75, 1e-6);
}

TEST(Softmax, StableUnderLargeOffsets) {
  const auto p = softmax(logit_field(1, 1, 2, {1000.0, 1000.0 + std::log(3.0)}));
  EXPECT_NEAR(p(0, 0, 0), 0.25, 1e-6);
  EXPECT_NEAR(p(0, 0, 1), 0.75, 1e-6);
  const auto q = softmax(logit_field(1, 1, 3, {-5000.0, 80000.0, 80000.0}));
  EXPECT_NEAR(q(0, 0, 1), 0.5, 1e-6);
  EXPECT_EQ(q(0, 0, 0), 0.0f);
}

TEST(Softmax, ShiftInvariantAndNormalized) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> shift(0.0, 50.0);
  for (int t = 0; t < 30; ++t) {
    // Logits on a 2^-10 grid so integer shifts are exact.
    auto l = oracle::random_logits(rng, 5, 4, 3);
    std::vector<double> grid(l.data().begin(), l.data().end());
    for (auto& x : grid) x = std::ldexp(std::round(std::ldexp(x, 10)), -10);
    l = logit_field(5, 4, 3, grid);
    std::vector<double> shifted = grid;
    for (std::size_t i = 0; i < l.pixel_count(); ++i) {
      const double s = std::round(shift(rng));
      for (std::size_t k = 0; k < 3; ++k) shifted[i * 3 + k] += s;
    }
    const auto a = softmax(l);
    const auto b = softmax(logit_field(5, 4, 3, shifted));
    for (std::size_t i = 0; i < a.data().size(); ++i) EXPECT_NEAR(a.data()[i], b.data()[i], 1e-6);
    for (std::size_t i = 0; i < a.pixel_count(); ++i) {
      double s = 0;
      for (float v : a.pixel(i)) s += v;
      EXPECT_NEAR(s, 1.0, 1e-6);
    }
  }
}

TEST(ToUnary, KnownValues) {
  EXPECT_EQ(to_unary(single(1.0f, 0.0f))(0, 0, 0), 0.0);
  EXPECT_NEAR(to_unary(single(0.5f, 0.5f))(0, 0, 0), 0.6931, 1e-4);
  EXPECT_NEAR(to_unary(single(1.0f, 0.0f), 1e-8)(0, 0, 1), -std::log(1e-8), 1e-9);
  EXPECT_NEAR(to_unary(single(1.0f, 0.0f), 1e-8)(0, 0, 1), 18.42, 5e-3);
}

TEST(ToUnary, FloorMustLieBelowUniform) {
  EXPECT_THROW(to_unary(single(0.5f, 0.5f), 0.0), mlcrf::invalid_argument);
  EXPECT_THROW(to_unary(single(0.5f, 0.5f), 0.5), mlcrf::invalid_argument);
}

TEST(ToUnary, ArgmaxInvariance) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 20; ++t) {
    const auto p = softmax(oracle::random_logits(rng, 6, 6, 3, 1.5));
    const auto u = to_unary(p, 1e-12);
    std::vector<double> pd(p.data().begin(), p.data().end());
    EXPECT_EQ(oracle::unary_argmin(u), oracle::argmax_scan(pd, 6, 6, 3));
  }
}

TEST(Fuse, EmptyRegionListIsIdentity) {
  std::mt19937_64 rng(1);
  const auto s = oracle::random_unary(rng, 5, 4, 2);
  EXPECT_EQ(fuse_object_unary(s, {}), s);
}

TEST(Fuse, FullImageRegionOverridesEverything) {
  std::mt19937_64 rng(2);
  const auto s = oracle::random_unary(rng, 5, 4, 2);
  const auto r = oracle::random_unary(rng, 5, 4, 2);
  EXPECT_EQ(fuse_object_unary(s, {{region_translation{0, 0, 4, 5}, r}}), r);
}

TEST(Fuse, TwoByTwoRegionReplacesExactlyFourPixels) {
  std::mt19937_64 rng(3);
  const auto s = oracle::random_unary(rng, 4, 4, 2);
  const auto r = oracle::random_unary(rng, 2, 2, 2);
  const region_translation t{1, 1, 2, 2};
  const auto f = fuse_object_unary(s, {{t, r}});
  std::size_t replaced = 0;
  for (std::size_t row = 0; row < 4; ++row)
    for (std::size_t col = 0; col < 4; ++col) {
      const bool inside = row >= 1 && row < 3 && col >= 1 && col < 3;
      for (std::size_t k = 0; k < 2; ++k) {
        if (inside)
          EXPECT_EQ(f(row, col, k), r(row - 1, col - 1, k));
        else
          EXPECT_EQ(f(row, col, k), s(row, col, k));
      }
      replaced += inside;
    }
  EXPECT_EQ(replaced, 4u);
}

TEST(Fuse, TouchesExactlyTheUnionOfRegions) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 25; ++t) {
    const auto s = oracle::random_unary(rng, 20, 16, 2);
    std::vector<std::pair<region_translation, unary_field>> regions;
    std::vector<int> member(20 * 16, 0);
    // Regions tile disjoint vertical bands.
    std::size_t col = 0;
    std::uniform_int_distribution<int> gap(0, 3), wid(1, 5), top(0, 8), hei(1, 7);
    while (true) {
      col += static_cast<std::size_t>(gap(rng));
      const auto w = static_cast<std::size_t>(wid(rng));
      if (col + w > 20) break;
      const auto r0 = static_cast<std::size_t>(top(rng));
      const auto h = static_cast<std::size_t>(hei(rng));
      regions.push_back({{r0, col, h, w}, oracle::random_unary(rng, w, h, 2)});
      for (std::size_t r = r0; r < r0 + h; ++r)
        for (std::size_t c = col; c < col + w; ++c) member[r * 20 + c] = 1;
      col += w;
    }
    const auto f = fuse_object_unary(s, regions);
    std::size_t changed = 0, expected = 0;
    for (std::size_t i = 0; i < member.size(); ++i) {
      bool diff = false;
      for (std::size_t k = 0; k < 2; ++k) diff |= f.data()[i * 2 + k] != s.data()[i * 2 + k];
      changed += diff;
      expected += static_cast<std::size_t>(member[i]);
      if (!member[i]) {
        EXPECT_FALSE(diff);
      }
    }
    EXPECT_EQ(changed, expected);  // random unaries never coincide exactly
  }
}

TEST(Fuse, RejectsOverlapAndMismatches) {
  std::mt19937_64 rng(5);
  const auto s = oracle::random_unary(rng, 6, 6, 2);
  const auto r = oracle::random_unary(rng, 3, 3, 2);
  EXPECT_THROW(fuse_object_unary(s, {{{0, 0, 3, 3}, r}, {{2, 2, 3, 3}, r}}), mlcrf::invalid_argument);
  EXPECT_THROW(fuse_object_unary(s, {{{0, 0, 3, 4}, r}}), dimension_error);
  EXPECT_THROW(fuse_object_unary(s, {{{4, 4, 3, 3}, r}}), dimension_error);
  EXPECT_NO_THROW(fuse_object_unary(s, {{{0, 0, 3, 3}, r}, {{0, 3, 3, 3}, r}}));
}

TEST(Resample, IdentityResizeIsUnchanged) {
  std::mt19937_64 rng(6);
  const auto p = softmax(oracle::random_logits(rng, 7, 5, 2));
  const auto q = resample_bilinear(p, 7, 5);
  for (std::size_t i = 0; i < p.data().size(); ++i) EXPECT_NEAR(p.data()[i], q.data()[i], 1e-6);
}

TEST(Resample, ConstantFieldStaysConstant) {
  const probability_field p(4, 3, 2, std::vector<float>{0.3f, 0.7f, 0.3f, 0.7f, 0.3f, 0.7f, 0.3f, 0.7f,
                                                        0.3f, 0.7f, 0.3f, 0.7f, 0.3f, 0.7f, 0.3f, 0.7f,
                                                        0.3f, 0.7f, 0.3f, 0.7f, 0.3f, 0.7f, 0.3f, 0.7f});
  for (auto [w, h] : {std::pair{1, 1}, {9, 2}, {13, 17}}) {
    const auto q = resample_bilinear(p, static_cast<std::size_t>(w), static_cast<std::size_t>(h));
    for (std::size_t i = 0; i < q.pixel_count(); ++i) {
      EXPECT_NEAR(q.pixel(i)[0], 0.3, 1e-6);
      EXPECT_NEAR(q.pixel(i)[1], 0.7, 1e-6);
    }
  }
}

TEST(Resample, TwoToThreeMidpointIsHalf) {
  const probability_field p(2, 1, 2, {1.0f, 0.0f, 0.0f, 1.0f});
  const auto q = resample_bilinear(p, 3, 1);
  EXPECT_NEAR(q(0, 1, 0), 0.5, 1e-6);
  EXPECT_NEAR(q(0, 1, 1), 0.5, 1e-6);
  EXPECT_NEAR(q(0, 0, 0), 1.0, 1e-6);
  EXPECT_NEAR(q(0, 2, 1), 1.0, 1e-6);
}

TEST(Resample, OutputsAreDistributions) {
  std::mt19937_64 rng(7);
  const auto p = softmax(oracle::random_logits(rng, 5, 6, 3));
  const auto q = resample_bilinear(p, 11, 3);
  for (std::size_t i = 0; i < q.pixel_count(); ++i) {
    double s = 0;
    for (float v : q.pixel(i)) s += v;
    EXPECT_NEAR(s, 1.0, 1e-6);
  }
  EXPECT_THROW(resample_bilinear(p, 0, 3), mlcrf::invalid_argument);
}

TEST(CombineUnaries, ScaledSum) {
  const unary_field a(1, 1, 2, std::vector<double>{1.0, 2.0});
  const unary_field b(1, 1, 2, std::vector<double>{3.0, 5.0});
  const auto c = combine_unaries(a, b, 0.5);
  EXPECT_DOUBLE_EQ(c(0, 0, 0), 2.5);
  EXPECT_DOUBLE_EQ(c(0, 0, 1), 4.5);
}
