// Copyright 2026 The mlcrf Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace mlcrf;

namespace {

double relative_l2(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

std::vector<double> random_values(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST(BruteForce, IdenticalPointsShareFullWeight) {
  const feature_set f(2, {0.5, 0.5, 0.5, 0.5});
  const auto out = gaussian_filter_bruteforce(f, std::vector<double>{1.0, 0.0});
  EXPECT_DOUBLE_EQ(out[0], 1.0);
  EXPECT_DOUBLE_EQ(out[1], 1.0);
}

TEST(BruteForce, RootTwoApartGivesExpMinusOne) {
  const feature_set f(2, {0.0, 0.0, 1.0, 1.0});
  const auto out = gaussian_filter_bruteforce(f, std::vector<double>{1.0, 0.0});
  EXPECT_NEAR(out[0], 1.0, 1e-6);
  EXPECT_NEAR(out[1], 0.3679, 1e-4);
  EXPECT_NEAR(out[1], std::exp(-1.0), 1e-12);
}

TEST(BruteForce, SinglePointReturnsItsValue) {
  const feature_set f(3, {4.0, -2.0, 7.0});
  EXPECT_DOUBLE_EQ(gaussian_filter_bruteforce(f, std::vector<double>{2.5})[0], 2.5);
}

TEST(BruteForce, IsSelfAdjoint) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 10; ++t) {
    const auto f = oracle::random_features(rng, 200, 3, 4.0);
    const auto u = random_values(rng, 200), v = random_values(rng, 200);
    const auto fu = gaussian_filter_bruteforce(f, u), fv = gaussian_filter_bruteforce(f, v);
    double a = 0, b = 0;
    for (std::size_t i = 0; i < 200; ++i) a += fu[i] * v[i], b += u[i] * fv[i];
    EXPECT_NEAR(a, b, 1e-6 * std::abs(a));
  }
}

TEST(BruteForce, MultiChannelValuesAreIndependent) {
  std::mt19937_64 rng(2);
  const auto f = oracle::random_features(rng, 50, 2, 3.0);
  const auto a = random_values(rng, 50), b = random_values(rng, 50);
  std::vector<double> ab(100);
  for (std::size_t i = 0; i < 50; ++i) ab[2 * i] = a[i], ab[2 * i + 1] = b[i];
  const auto out = gaussian_filter_bruteforce(f, ab, 2);
  const auto fa = gaussian_filter_bruteforce(f, a), fb = gaussian_filter_bruteforce(f, b);
  for (std::size_t i = 0; i < 50; ++i) {
    EXPECT_DOUBLE_EQ(out[2 * i], fa[i]);
    EXPECT_DOUBLE_EQ(out[2 * i + 1], fb[i]);
  }
}

TEST(FastFilter, ConstantInputGivesNormalizedConstant) {
  std::mt19937_64 rng(3);
  const auto f = oracle::random_features(rng, 500, 2, 10.0);
  const std::vector<double> ones(500, 1.0), twos(500, 2.0);
  const auto mass = gaussian_filter_fast(f, ones);
  const auto out = gaussian_filter_fast(f, twos);
  for (std::size_t i = 0; i < 500; ++i) EXPECT_NEAR(out[i] / mass[i], 2.0, 1e-6);
}

TEST(FastFilter, DuplicatingPointsDoublesOutput) {
  std::mt19937_64 rng(4);
  const auto f = oracle::random_features(rng, 300, 3, 6.0);
  const auto v = random_values(rng, 300);
  std::vector<double> coords(f.coords().begin(), f.coords().end());
  coords.insert(coords.end(), f.coords().begin(), f.coords().end());
  std::vector<double> vv = v;
  vv.insert(vv.end(), v.begin(), v.end());
  const auto once = gaussian_filter_fast(f, v);
  const auto twice = gaussian_filter_fast(feature_set(3, coords), vv);
  for (std::size_t i = 0; i < 300; ++i) {
    EXPECT_NEAR(twice[i], 2.0 * once[i], 1e-6 * std::abs(once[i]));
    EXPECT_NEAR(twice[300 + i], 2.0 * once[i], 1e-6 * std::abs(once[i]));
  }
}

TEST(FastFilter, MatchesBruteForceOnRandomSets) {
  std::mt19937_64 rng(5);
  for (std::size_t d : {2u, 3u, 5u})
    for (double spread : {2.0, 8.0, 30.0}) {
      const auto f = oracle::random_features(rng, 1500, d, spread);
      const auto v = random_values(rng, 1500);
      EXPECT_LE(relative_l2(gaussian_filter_fast(f, v), gaussian_filter_bruteforce(f, v)), 1e-2)
          << "d=" << d << " spread=" << spread;
    }
}

TEST(FastFilter, MatchesBruteForceOnImageFeatures) {
  std::mt19937_64 rng(6);
  const auto img = oracle::random_color(rng, 64, 64);
  const auto kernels = build_kernels(img, nullptr, crf_config::mju_waste());
  for (const auto& k : kernels) {
    const auto v = random_values(rng, k.features.size());
    EXPECT_LE(relative_l2(gaussian_filter_fast(k.features, v),
                          gaussian_filter_bruteforce(k.features, v)),
              1e-2)
        << to_string(k.kind);
  }
}

TEST(FastFilter, FilterObjectsAreReusable) {
  std::mt19937_64 rng(7);
  const auto f = oracle::random_features(rng, 400, 5, 5.0);
  const cutoff_filter fast(f);
  const bruteforce_filter slow(f);
  EXPECT_EQ(fast.size(), 400u);
  for (int t = 0; t < 3; ++t) {
    const auto v = random_values(rng, 800);
    EXPECT_LE(relative_l2(fast.apply(v, 2), slow.apply(v, 2)), 1e-6);
  }
}

TEST(FastFilter, ValueShapeIsChecked) {
  const feature_set f(2, {0, 0, 1, 1});
  EXPECT_THROW(gaussian_filter_fast(f, std::vector<double>{1.0}), dimension_error);
  EXPECT_THROW(gaussian_filter_bruteforce(f, std::vector<double>{1.0, 2.0, 3.0}), dimension_error);
}

TEST(Lattice, ApproximatesTheGaussianCoarsely) {
  // The lattice backend trades accuracy for linear cost; it must still track
  // the exact sum to within a loose bound.
  std::mt19937_64 rng(8);
  const auto f = oracle::random_features(rng, 1000, 2, 10.0);
  const auto v = random_values(rng, 1000);
  const auto approx = permutohedral_lattice(f).apply(v, 1);
  EXPECT_LE(relative_l2(approx, gaussian_filter_bruteforce(f, v)), 0.3);
}

TEST(Features, RejectMalformedCoordinates) {
  EXPECT_THROW(feature_set(0, {}), mlcrf::invalid_argument);
  EXPECT_THROW(feature_set(2, {1.0, 2.0, 3.0}), dimension_error);
  EXPECT_THROW(feature_set(1, {std::nan("")}), mlcrf::invalid_argument);
}
