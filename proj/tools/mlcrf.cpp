// Copyright 2026 The mlcrf Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "mlcrf/mlcrf.hpp"

namespace fs = std::filesystem;
using namespace mlcrf;

namespace {

struct global_options {
  std::string config_file;
  std::string preset;
  std::string depth;
  std::string out;
  std::optional<std::size_t> depth_fill_window;
  std::optional<std::size_t> workers;
  bool verbose = false;
};

run_config assemble_config(const global_options& g) {
  run_config cfg = preset_config(g.preset.empty() ? "mju-waste" : g.preset);
  if (!g.config_file.empty()) cfg = load_config(g.config_file, cfg);
  if (g.depth_fill_window) cfg.depth_fill_window = *g.depth_fill_window;
  if (g.workers) cfg.workers = *g.workers;
  if (!g.out.empty()) cfg.output_dir = g.out;
  cfg.validate();
  return cfg;
}

depth_source depth_from(const std::string& arg) {
  if (arg.empty()) return {};
  if (arg == "none") return depth_source::none();
  return depth_source::from(arg);
}

fs::path require_dir(const std::string& flag_value, const fs::path& fallback, const char* what) {
  fs::path p = flag_value.empty() ? fallback : fs::path(flag_value);
  if (p.empty()) throw invalid_argument(std::string("no ") + what + " given");
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-level dense CRF segmentation refinement"};
  app.require_subcommand(1);

  global_options g;
  std::string data, manifests, pred, truth, grid_file;
  synth_options so;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", g.config_file, "key = value configuration file")
        ->check(CLI::ExistingFile);
    sub->add_option("--preset", g.preset, "parameter preset")
        ->check(CLI::IsMember({"mju-waste", "taco"}));
    sub->add_option("--depth", g.depth, "depth directory, or 'none' to disable depth");
    sub->add_option("--out", g.out, "output directory");
    sub->add_option("--depth-fill-window", g.depth_fill_window, "median window for depth holes");
    sub->add_option("--workers", g.workers, "image-level worker threads");
    sub->add_flag("--verbose", g.verbose, "print diagnostics");
  };

  auto* propose = app.add_subcommand("propose", "write region manifests and crops");
  add_common(propose);
  propose->add_option("--data", data, "dataset root");

  auto* refine = app.add_subcommand("refine", "run joint CRF inference");
  add_common(refine);
  refine->add_option("--data", data, "dataset root");
  refine->add_option("--manifests", manifests, "manifest directory (default <data>/manifests)");

  auto* evaluate = app.add_subcommand("evaluate", "score predicted masks");
  add_common(evaluate);
  evaluate->add_option("--pred", pred, "predicted mask directory")->required();
  evaluate->add_option("--truth", truth, "ground-truth mask directory")->required();

  auto* grid = app.add_subcommand("gridsearch", "search CRF parameters on a validation set");
  add_common(grid);
  grid->add_option("--data", data, "validation dataset root");
  grid->add_option("--manifests", manifests, "manifest directory (default <data>/manifests)");
  grid->add_option("--grid", grid_file, "grid file, lines of 'key = v1, v2'")
      ->required()
      ->check(CLI::ExistingFile);

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  add_common(synth);
  synth->add_option("--seed", so.seed, "random seed");
  synth->add_option("--count", so.count, "number of scenes");
  synth->add_option("--size", so.size, "scene side length in pixels")->check(CLI::Range(16, 4096));
  synth->add_option("--noise", so.noise, "degradation level (0 = exact)")->check(CLI::NonNegativeNumber);
  synth->add_flag("--camouflage", so.camouflage, "objects share the background color");

  CLI11_PARSE(app, argc, argv);

  try {
    const run_config cfg = assemble_config(g);
    const auto depth = depth_from(g.depth);

    if (propose->parsed()) {
      const auto root = require_dir(data, cfg.dataset_root, "dataset root (--data)");
      const auto out = require_dir(g.out, root, "output directory");
      const auto s = cmd_propose(root, out, cfg, depth);
      std::cout << s.images << " images, " << s.regions << " regions\n";
    } else if (refine->parsed()) {
      const auto root = require_dir(data, cfg.dataset_root, "dataset root (--data)");
      const auto out = require_dir(g.out, cfg.output_dir, "output directory (--out)");
      const auto mdir = manifests.empty() ? root / "manifests" : fs::path(manifests);
      const auto s = cmd_refine(root, mdir, out, cfg, depth, g.verbose);
      std::cout << s.images << " images refined\n";
      for (const auto& [id, e] : s.energies)
        std::printf("%s\tenergy %.6f (scene %.6f, object %.6f, pairwise %.6f)\n", id.c_str(),
                    e.total, e.scene, e.object, e.pairwise);
    } else if (evaluate->parsed()) {
      const auto report = cmd_evaluate(pred, truth, cfg.classes);
      std::cout << format_table(report);
      if (!g.out.empty()) {
        fs::create_directories(g.out);
        write_text(fs::path(g.out) / "metrics.json", to_json(report).dump(2) + "\n");
        write_text(fs::path(g.out) / "metrics.txt", format_table(report));
      }
      if (g.verbose) std::cout << to_json(report).dump(2) << '\n';
    } else if (grid->parsed()) {
      const auto root = require_dir(data, cfg.dataset_root, "dataset root (--data)");
      const auto mdir = manifests.empty() ? root / "manifests" : fs::path(manifests);
      std::ifstream gin(grid_file);
      const auto result = cmd_gridsearch(root, mdir, parse_grid(gin), cfg, depth);
      const auto table = format_grid_table(result);
      std::cout << table;
      if (!g.out.empty()) {
        fs::create_directories(g.out);
        write_text(fs::path(g.out) / "grid.tsv", table);
        write_text(fs::path(g.out) / "grid.json", to_json(result).dump(2) + "\n");
        write_text(fs::path(g.out) / "best.cfg", format_config(result.best_config));
      }
      if (g.verbose) std::cout << format_config(result.best_config);
    } else if (synth->parsed()) {
      const auto out = require_dir(g.out, cfg.dataset_root, "output directory (--out)");
      const auto ids = cmd_synth(so, out, cfg);
      std::cout << ids.size() << " scenes written to " << out.string() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "mlcrf: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
