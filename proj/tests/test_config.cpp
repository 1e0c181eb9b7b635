// Copyright 2026 The mlcrf Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"

using namespace mlcrf;

namespace {

run_config parse(const std::string& text, run_config base = {}) {
  std::istringstream in(text);
  return parse_config(in, std::move(base));
}

}  // namespace

TEST(Config, PresetsCarryTableValues) {
  const auto m = preset_config("mju-waste");
  EXPECT_EQ(m.crf, crf_config::mju_waste());
  EXPECT_EQ(m.proposer.n_min, 900u);
  EXPECT_EQ(m.proposer.n_max, 40000u);
  const auto t = preset_config("taco");
  EXPECT_EQ(t.crf, crf_config::taco());
  EXPECT_EQ(t.proposer.n_min, 25000u);
  EXPECT_EQ(t.proposer.n_max, 250000u);
  EXPECT_THROW(preset_config("coco"), mlcrf::invalid_argument);
}

TEST(Config, ExplicitKeysOverridePresetWhereverItAppears) {
  const auto c = parse("w_smooth = 5\n# comment\n\npreset = taco\niterations=3\n");
  EXPECT_EQ(c.preset, "taco");
  EXPECT_EQ(c.crf.w_smooth, 5.0);
  EXPECT_EQ(c.crf.iterations, 3u);
  EXPECT_EQ(c.crf.theta_alpha, 100.0);
}

TEST(Config, EveryKeyParses) {
  const auto c = parse(
      "alpha = 0.5\nw_appearance = 2\nw_smooth = 4\nw_depth = 1.5\n"
      "theta_alpha = 30\ntheta_beta = 10\ntheta_gamma = 2\ntheta_delta = 8\ntheta_epsilon = 40\n"
      "iterations = 7\nuse_depth = false\ninit = uniform\nkernel_norm = symmetric\n"
      "filter = lattice\nfilter_cutoff = 5\nextension_fraction = 0.25\nn_min = 10\nn_max = 20\n"
      "connectivity = 4\ndepth_fill_window = 7\nprobability_floor = 1e-6\nclasses = 2\n"
      "dataset_root = /data\noutput_dir = /out\nworkers = 3\n");
  EXPECT_EQ(c.crf.alpha, 0.5);
  EXPECT_EQ(c.crf.w_appearance, 2.0);
  EXPECT_EQ(c.crf.w_depth, 1.5);
  EXPECT_EQ(c.crf.theta_epsilon, 40.0);
  EXPECT_FALSE(c.crf.use_depth);
  EXPECT_EQ(c.crf.init, q_init::uniform);
  EXPECT_EQ(c.crf.norm, kernel_normalization::symmetric);
  EXPECT_EQ(c.crf.filter, filter_method::lattice);
  EXPECT_EQ(c.proposer.extension_fraction, 0.25);
  EXPECT_EQ(c.proposer.conn, connectivity::four);
  EXPECT_EQ(c.depth_fill_window, 7u);
  EXPECT_EQ(c.probability_floor, 1e-6);
  EXPECT_EQ(c.dataset_root, "/data");
  EXPECT_EQ(c.workers, 3u);
}

TEST(Config, FormatRoundTrips) {
  auto c = preset_config("taco");
  c.crf.alpha = 0.1;
  c.crf.norm = kernel_normalization::symmetric;
  c.proposer.conn = connectivity::four;
  c.depth_fill_window = 9;
  EXPECT_EQ(parse(format_config(c)).crf, c.crf);
  const auto again = parse(format_config(c));
  EXPECT_EQ(again.proposer.conn, connectivity::four);
  EXPECT_EQ(again.depth_fill_window, 9u);
  EXPECT_EQ(format_config(again), format_config(c));
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(parse("nonsense = 1\n"), mlcrf::invalid_argument);
  EXPECT_THROW(parse("alpha = x\n"), mlcrf::invalid_argument);
  EXPECT_THROW(parse("alpha\n"), mlcrf::invalid_argument);
  EXPECT_THROW(parse("iterations = -1\n"), mlcrf::invalid_argument);
  EXPECT_THROW(parse("iterations = 0\n"), mlcrf::invalid_argument);
  EXPECT_THROW(parse("depth_fill_window = 4\n"), mlcrf::invalid_argument);
  EXPECT_THROW(parse("classes = 3\n"), mlcrf::invalid_argument);
  EXPECT_THROW(parse("connectivity = 6\n"), mlcrf::invalid_argument);
  EXPECT_THROW(parse("use_depth = maybe\n"), mlcrf::invalid_argument);
  EXPECT_THROW(parse("n_min = 50\nn_max = 40\n"), mlcrf::invalid_argument);
  EXPECT_THROW(load_config("/nonexistent/mlcrf.cfg"), io_error);
}

TEST(Config, GridParsing) {
  std::istringstream in("w_appearance = 0, 3\n theta_gamma=1,10 \n");
  const auto g = parse_grid(in);
  ASSERT_EQ(g.size(), 2u);
  EXPECT_EQ(g[0].first, "w_appearance");
  EXPECT_EQ(g[0].second, (std::vector<std::string>{"0", "3"}));
  EXPECT_EQ(g[1].second, (std::vector<std::string>{"1", "10"}));
  std::istringstream bad("alpha = 1,,2\n");
  EXPECT_THROW(parse_grid(bad), mlcrf::invalid_argument);
}
