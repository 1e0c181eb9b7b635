// Copyright 2026 The mlcrf Authors
// SPDX-License-Identifier: Apache-2.0

// Dataset layout shared by every command (ids are file stems):
//
//   <root>/color/<id>.png        RGB image
//   <root>/depth/<id>.mlf|.png   depth in mm, 0 = missing (optional)
//   <root>/truth/<id>.png        ground-truth mask (evaluation only)
//   <root>/scene/<id>.mlf        coarse logits, H x W x 2
//   <root>/manifests/<id>.json   region manifest
//   <root>/regions/<id>_r<k>.mlf fine logits for region k

#ifndef MLCRF_PIPELINE_HPP_
#define MLCRF_PIPELINE_HPP_

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

#include "mlcrf/array_io.hpp"
#include "mlcrf/config.hpp"
#include "mlcrf/densecrf.hpp"
#include "mlcrf/depthfill.hpp"
#include "mlcrf/manifest.hpp"
#include "mlcrf/metrics.hpp"
#include "mlcrf/png_io.hpp"
#include "mlcrf/proposer.hpp"
#include "mlcrf/synth.hpp"
#include "mlcrf/unary.hpp"

namespace mlcrf {

namespace fs = std::filesystem;

/// Runs fn(i) for i in [0, count) on up to `workers` threads. The first
/// exception is rethrown after all workers stop.
inline void parallel_for(std::size_t count, std::size_t workers,
                         const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// MAP labeling of the coarse logits alone.
inline label_field scene_argmax(const logit_field& scene_logits) {
  return map_labels(softmax(scene_logits));
}

inline std::vector<region_proposal> proposals_for(const logit_field& scene_logits,
                                                  const proposer_config& cfg) {
  return propose(scene_argmax(scene_logits), cfg);
}

/// Everything one image contributes to inference.
struct image_inputs {
  std::string id;
  logit_field scene_logits;
  std::vector<std::pair<region_translation, logit_field>> region_logits;
  color_field color;
  std::optional<depth_field> depth;
};

struct refine_result {
  label_field labels;
  marginal_field marginals;
  std::size_t kernel_count = 0;
  std::optional<energy_terms> energy;
};

/// Unary construction, fusion, kernels and mean-field for one image.
inline refine_result refine_image(const image_inputs& in, const run_config& cfg,
                                  bool with_energy = false) {
  const auto& logits = in.scene_logits;
  if (!logits.same_grid(in.color.width(), in.color.height()))
    throw dimension_error(in.id + ": scene logits and color image differ in size");
  if (logits.classes() != cfg.classes)
    throw dimension_error(in.id + ": scene logits have " + std::to_string(logits.classes()) +
                          " classes, expected " + std::to_string(cfg.classes));

  const auto scene_unary = to_unary(softmax(logits), cfg.probability_floor);
  std::vector<std::pair<region_translation, unary_field>> regions;
  for (const auto& [t, rl] : in.region_logits) {
    auto probs = softmax(rl);
    if (!probs.same_grid(t.region_width, t.region_height))
      probs = resample_bilinear(probs, t.region_width, t.region_height);
    regions.emplace_back(t, to_unary(probs, cfg.probability_floor));
  }
  const auto fused = fuse_object_unary(scene_unary, regions);

  std::optional<depth_field> filled;
  if (in.depth && cfg.crf.use_depth) {
    if (!(in.depth->width() == in.color.width() && in.depth->height() == in.color.height()))
      throw dimension_error(in.id + ": depth and color image differ in size");
    filled = in.depth->missing_count() ? fill_missing(*in.depth, cfg.depth_fill_window)
                                       : *in.depth;
  }
  const auto kernels = build_kernels(in.color, filled ? &*filled : nullptr, cfg.crf);

  refine_result out;
  out.marginals = mean_field(scene_unary, fused, kernels, cfg.crf);
  out.labels = map_labels(out.marginals);
  out.kernel_count = kernels.size();
  if (with_energy && out.labels.pixel_count() <= default_energy_cap)
    out.energy = energy(out.labels, scene_unary, fused, kernels, cfg.crf);
  return out;
}

// Dataset access -------------------------------------------------------------

/// Sorted file stems in `dir` with the given extension.
inline std::vector<std::string> list_ids(const fs::path& dir, const std::string& ext) {
  if (!fs::is_directory(dir)) throw io_error("not a directory: " + dir.string());
  std::vector<std::string> ids;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ext) ids.push_back(e.path().stem().string());
  std::sort(ids.begin(), ids.end());
  return ids;
}

/// Where depth comes from: the dataset's depth/ folder, an explicit folder,
/// or nowhere.
struct depth_source {
  enum class mode { dataset, directory, none } kind = mode::dataset;
  fs::path dir;

  static depth_source none() { return {mode::none, {}}; }
  static depth_source from(const fs::path& d) { return {mode::directory, d}; }

  std::optional<depth_field> load(const fs::path& root, const std::string& id) const {
    if (kind == mode::none) return std::nullopt;
    const fs::path base = kind == mode::dataset ? root / "depth" : dir;
    for (const char* ext : {".mlf", ".png"}) {
      const auto p = base / (id + ext);
      if (fs::exists(p)) return read_depth(p);
    }
    if (kind == mode::directory) throw io_error("missing depth for " + id + " in " + dir.string());
    return std::nullopt;
  }
};

inline fs::path resolve(const fs::path& root, const std::string& rel) {
  const fs::path p(rel);
  return p.is_absolute() ? p : root / p;
}

/// Regenerates proposals from the scene logits and rejects stale manifests.
inline void check_manifest(const region_manifest& m, const logit_field& scene_logits,
                           const proposer_config& cfg) {
  if (!scene_logits.same_grid(m.width, m.height))
    throw dimension_error(m.image_id + ": manifest size does not match scene logits");
  const auto proposals = proposals_for(scene_logits, cfg);
  const auto hash = proposal_hash(m.width, m.height, proposals);
  bool same = hash == m.proposal_hash && proposals.size() == m.regions.size();
  for (std::size_t k = 0; same && k < proposals.size(); ++k)
    same = proposals[k].bounds == m.regions[k].bounds;
  if (!same)
    throw format_error(m.image_id + ": stale manifest, proposals do not regenerate from the scene logits");
}

inline image_inputs load_image_inputs(const fs::path& root, const fs::path& manifest_dir,
                                      const std::string& id, const run_config& cfg,
                                      const depth_source& depth) {
  image_inputs in;
  in.id = id;
  in.scene_logits = read_logits(root / "scene" / (id + ".mlf"));
  in.color = read_png_color(root / "color" / (id + ".png"));
  in.depth = depth.load(root, id);

  const auto mpath = manifest_dir / (id + ".json");
  const auto manifest = read_manifest(mpath);
  if (manifest.image_id != id) throw format_error(mpath.string() + ": image id mismatch");
  check_manifest(manifest, in.scene_logits, cfg.proposer);
  for (const auto& r : manifest.regions) {
    const auto lp = resolve(root, r.logits);
    if (!fs::exists(lp))
      throw io_error(id + ": missing logits for region " + std::to_string(r.region_id) + " (" +
                     lp.string() + ")");
    in.region_logits.emplace_back(
        region_translation{r.bounds.top, r.bounds.left, r.bounds.height, r.bounds.width},
        read_logits(lp));
  }
  return in;
}

// Commands -------------------------------------------------------------------

struct propose_summary {
  std::size_t images = 0;
  std::size_t regions = 0;
};

/// Writes <out>/manifests/<id>.json and per-region crops under <out>/crops/.
inline propose_summary cmd_propose(const fs::path& root, const fs::path& out,
                                   const run_config& cfg, const depth_source& depth) {
  cfg.validate();
  const auto ids = list_ids(root / "scene", ".mlf");
  fs::create_directories(out / "manifests");
  fs::create_directories(out / "crops");
  std::vector<std::size_t> counts(ids.size(), 0);
  parallel_for(ids.size(), cfg.workers, [&](std::size_t n) {
    const auto& id = ids[n];
    const auto logits = read_logits(root / "scene" / (id + ".mlf"));
    const auto proposals = proposals_for(logits, cfg.proposer);
    write_manifest(make_manifest(id, logits.width(), logits.height(), proposals),
                   out / "manifests" / (id + ".json"));
    counts[n] = proposals.size();

    const auto color_path = root / "color" / (id + ".png");
    if (proposals.empty() || !fs::exists(color_path)) return;
    const auto color = read_png_color(color_path);
    if (!color.same_grid(logits.width(), logits.height()))
      throw dimension_error(id + ": scene logits and color image differ in size");
    const auto d = depth.load(root, id);
    for (std::size_t k = 0; k < proposals.size(); ++k) {
      const auto& b = proposals[k].bounds;
      color_field crop(b.width, b.height);
      std::vector<float> dcrop(b.area());
      for (std::size_t r = 0; r < b.height; ++r)
        for (std::size_t c = 0; c < b.width; ++c) {
          for (std::size_t ch = 0; ch < 3; ++ch) crop(r, c, ch) = color(b.top + r, b.left + c, ch);
          if (d) dcrop[r * b.width + c] = (*d)(b.top + r, b.left + c);
        }
      const auto stem = id + "_r" + std::to_string(k);
      write_png_color(crop, out / "crops" / (stem + ".png"));
      if (d) write_field(depth_field(b.width, b.height, std::move(dcrop)),
                         out / "crops" / (stem + "_depth.mlf"));
    }
  });
  propose_summary s{ids.size(), 0};
  for (auto c : counts) s.regions += c;
  return s;
}

struct refine_summary {
  std::size_t images = 0;
  std::vector<std::pair<std::string, energy_terms>> energies;
};

/// Writes <out>/masks/<id>.png (0/255) and <out>/marginals/<id>.mlf.
inline refine_summary cmd_refine(const fs::path& root, const fs::path& manifest_dir,
                                 const fs::path& out, const run_config& cfg,
                                 const depth_source& depth, bool verbose = false) {
  cfg.validate();
  const auto ids = list_ids(root / "scene", ".mlf");
  fs::create_directories(out / "masks");
  fs::create_directories(out / "marginals");
  std::vector<std::optional<energy_terms>> energies(ids.size());
  parallel_for(ids.size(), cfg.workers, [&](std::size_t n) {
    const auto& id = ids[n];
    const auto in = load_image_inputs(root, manifest_dir, id, cfg, depth);
    const auto res = refine_image(in, cfg, verbose);
    write_png_mask(res.labels, out / "masks" / (id + ".png"));
    std::vector<float> q(res.marginals.data().begin(), res.marginals.data().end());
    write_array(float_array(res.marginals.width(), res.marginals.height(), res.marginals.classes(), q),
                out / "marginals" / (id + ".mlf"));
    energies[n] = res.energy;
  });
  refine_summary s{ids.size(), {}};
  for (std::size_t n = 0; n < ids.size(); ++n)
    if (energies[n]) s.energies.emplace_back(ids[n], *energies[n]);
  return s;
}

inline metrics_report cmd_evaluate(const fs::path& pred_dir, const fs::path& truth_dir,
                                   std::size_t classes = 2) {
  const auto pred_ids = list_ids(pred_dir, ".png");
  const auto truth_ids = list_ids(truth_dir, ".png");
  if (pred_ids != truth_ids) {
    std::vector<std::string> diff;
    std::set_symmetric_difference(pred_ids.begin(), pred_ids.end(), truth_ids.begin(),
                                  truth_ids.end(), std::back_inserter(diff));
    throw invalid_argument("prediction and truth id sets differ (" + std::to_string(diff.size()) +
                           " unmatched, e.g. '" + (diff.empty() ? "" : diff.front()) + "')");
  }
  if (pred_ids.empty()) throw invalid_argument("no masks to evaluate in " + pred_dir.string());
  confusion_counts counts(classes);
  for (const auto& id : pred_ids)
    counts = accumulate(read_png_mask(pred_dir / (id + ".png")),
                        read_png_mask(truth_dir / (id + ".png")), counts);
  return summarize(counts);
}

// Grid search ----------------------------------------------------------------

/// Ordered parameter axes, e.g. {"w_appearance", {"0", "3"}}.
using parameter_grid = std::vector<std::pair<std::string, std::vector<std::string>>>;

/// Lines of `key = v1, v2, ...`.
inline parameter_grid parse_grid(std::istream& in) {
  parameter_grid grid;
  for (auto& [key, values] : parse_key_values(in)) {
    std::vector<std::string> vs;
    std::stringstream ss(values);
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto v = detail::trim(item);
      if (v.empty()) throw invalid_argument("grid key '" + key + "' has an empty value");
      vs.push_back(v);
    }
    if (vs.empty()) throw invalid_argument("grid key '" + key + "' lists no values");
    grid.emplace_back(key, std::move(vs));
  }
  return grid;
}

struct grid_row {
  std::vector<std::pair<std::string, std::string>> settings;
  double waste_iou = 0.0;
  metrics_report report;
};

struct grid_result {
  std::vector<grid_row> rows;
  std::size_t best = 0;
  run_config best_config;
};

/// Exhaustive search; rows follow odometer order with the last axis fastest.
/// The first row reaching the highest waste-class IoU wins.
inline grid_result grid_search(const std::vector<image_inputs>& validation,
                               const std::vector<label_field>& truth, const parameter_grid& grid,
                               const run_config& base) {
  if (grid.empty()) throw invalid_argument("empty parameter grid");
  if (validation.size() != truth.size() || validation.empty())
    throw invalid_argument("grid search needs matching, non-empty validation images and truth");
  std::size_t total = 1;
  for (const auto& [k, vs] : grid) total *= vs.size();

  grid_result res;
  std::vector<std::size_t> digit(grid.size(), 0);
  for (std::size_t row = 0; row < total; ++row) {
    run_config cfg = base;
    grid_row gr;
    for (std::size_t a = 0; a < grid.size(); ++a) {
      apply_setting(cfg, grid[a].first, grid[a].second[digit[a]]);
      gr.settings.emplace_back(grid[a].first, grid[a].second[digit[a]]);
    }
    cfg.validate();
    std::vector<confusion_counts> per(validation.size(), confusion_counts(cfg.classes));
    parallel_for(validation.size(), cfg.workers, [&](std::size_t n) {
      per[n] = accumulate(refine_image(validation[n], cfg).labels, truth[n],
                          confusion_counts(cfg.classes));
    });
    confusion_counts counts(cfg.classes);
    for (const auto& c : per) counts += c;
    gr.report = summarize(counts);
    gr.waste_iou = gr.report.iou;
    if (row == 0 || gr.waste_iou > res.rows[res.best].waste_iou) {
      res.best = row;
      res.best_config = cfg;
    }
    res.rows.push_back(std::move(gr));

    for (std::size_t a = grid.size(); a-- > 0;) {
      if (++digit[a] < grid[a].second.size()) break;
      digit[a] = 0;
    }
  }
  return res;
}

inline std::string format_grid_table(const grid_result& g) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(4);
  for (const auto& [k, v] : g.rows.front().settings) os << k << '\t';
  os << "IoU\tmIoU\tPrec\tMean\n";
  for (std::size_t r = 0; r < g.rows.size(); ++r) {
    const auto& row = g.rows[r];
    for (const auto& [k, v] : row.settings) os << v << '\t';
    os << row.report.iou << '\t' << row.report.miou << '\t' << row.report.prec << '\t'
       << row.report.mean << (r == g.best ? "\t*" : "") << '\n';
  }
  return os.str();
}

inline nlohmann::json to_json(const grid_result& g) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : g.rows) {
    nlohmann::json s = nlohmann::json::object();
    for (const auto& [k, v] : row.settings) s[k] = v;
    rows.push_back({{"settings", s}, {"metrics", to_json(row.report)}});
  }
  return {{"best_row", g.best}, {"rows", rows}};
}

/// Loads every image of a dataset with its truth mask for in-memory search.
inline std::pair<std::vector<image_inputs>, std::vector<label_field>> load_validation_set(
    const fs::path& root, const fs::path& manifest_dir, const run_config& cfg,
    const depth_source& depth) {
  std::vector<image_inputs> inputs;
  std::vector<label_field> truth;
  for (const auto& id : list_ids(root / "scene", ".mlf")) {
    inputs.push_back(load_image_inputs(root, manifest_dir, id, cfg, depth));
    truth.push_back(read_png_mask(root / "truth" / (id + ".png")));
  }
  return {std::move(inputs), std::move(truth)};
}

inline grid_result cmd_gridsearch(const fs::path& root, const fs::path& manifest_dir,
                                  const parameter_grid& grid, const run_config& cfg,
                                  const depth_source& depth) {
  if (grid.empty()) throw invalid_argument("empty parameter grid");
  auto [inputs, truth] = load_validation_set(root, manifest_dir, cfg, depth);
  return grid_search(inputs, truth, grid, cfg);
}

// Synthetic data -------------------------------------------------------------

/// In-memory inputs for a synthetic scene, with region logits for the
/// proposals regenerated from its coarse logits.
inline image_inputs synthetic_inputs(const synthetic_scene& sc, const proposer_config& cfg,
                                     bool with_depth = true) {
  image_inputs in;
  in.id = sc.id;
  in.scene_logits = sc.scene_logits;
  in.color = sc.color;
  if (with_depth) in.depth = sc.depth;
  for (const auto& p : proposals_for(sc.scene_logits, cfg))
    in.region_logits.emplace_back(p.translation(), synthetic_region_logits(sc, p.bounds));
  return in;
}

/// Writes a complete dataset (see layout above), manifests included.
inline std::vector<std::string> cmd_synth(const synth_options& opt, const fs::path& root,
                                          const run_config& cfg) {
  cfg.validate();
  for (const char* sub : {"color", "depth", "truth", "scene", "manifests", "regions"})
    fs::create_directories(root / sub);
  std::vector<std::string> ids(opt.count);
  parallel_for(opt.count, cfg.workers, [&](std::size_t n) {
    const auto sc = make_synthetic_scene(opt, n);
    ids[n] = sc.id;
    write_png_color(sc.color, root / "color" / (sc.id + ".png"));
    write_field(sc.depth, root / "depth" / (sc.id + ".mlf"));
    write_png_mask(sc.truth, root / "truth" / (sc.id + ".png"));
    write_field(sc.scene_logits, root / "scene" / (sc.id + ".mlf"));
    const auto proposals = proposals_for(sc.scene_logits, cfg.proposer);
    const auto manifest = make_manifest(sc.id, sc.color.width(), sc.color.height(), proposals);
    for (std::size_t k = 0; k < proposals.size(); ++k)
      write_field(synthetic_region_logits(sc, proposals[k].bounds),
                  resolve(root, manifest.regions[k].logits));
    write_manifest(manifest, root / "manifests" / (sc.id + ".json"));
  });
  return ids;
}

}  // namespace mlcrf

#endif  // MLCRF_PIPELINE_HPP_
