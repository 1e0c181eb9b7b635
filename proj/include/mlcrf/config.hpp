// Copyright 2026 The mlcrf Authors
// SPDX-License-Identifier: Apache-2.0

// Flat `key = value` configuration. Lines starting with '#' are comments.
// A `preset = mju-waste|taco` line resets every field to that preset before
// the remaining keys are applied, wherever it appears in the file.

#ifndef MLCRF_CONFIG_HPP_
#define MLCRF_CONFIG_HPP_

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mlcrf/densecrf.hpp"
#include "mlcrf/depthfill.hpp"
#include "mlcrf/proposer.hpp"
#include "mlcrf/unary.hpp"

namespace mlcrf {

struct run_config {
  std::string preset = "mju-waste";
  std::filesystem::path dataset_root;
  std::filesystem::path output_dir;
  crf_config crf = crf_config::mju_waste();
  proposer_config proposer;
  std::size_t depth_fill_window = default_fill_window;
  double probability_floor = default_probability_floor;
  std::size_t classes = 2;
  std::size_t workers = 1;

  void validate() const {
    crf.validate();
    proposer.validate();
    if (depth_fill_window < 3 || depth_fill_window % 2 == 0)
      throw invalid_argument("depth_fill_window must be odd and >= 3");
    if (classes != 2) throw invalid_argument("only the two-class setting is supported");
    if (!(probability_floor > 0.0) || probability_floor >= 1.0 / static_cast<double>(classes))
      throw invalid_argument("probability_floor must lie in (0, 1/C)");
    if (workers == 0) throw invalid_argument("workers must be >= 1");
  }
};

inline run_config preset_config(std::string_view name) {
  run_config cfg;
  if (name == "mju-waste") {
    cfg.preset = "mju-waste";
    cfg.crf = crf_config::mju_waste();
    cfg.proposer.n_min = 900;
    cfg.proposer.n_max = 40000;
  } else if (name == "taco") {
    cfg.preset = "taco";
    cfg.crf = crf_config::taco();
    cfg.proposer.n_min = 25000;
    cfg.proposer.n_max = 250000;
  } else {
    throw invalid_argument("unknown preset '" + std::string(name) + "'");
  }
  return cfg;
}

namespace detail {

inline std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end)
    throw invalid_argument("key '" + key + "': '" + v + "' is not a number");
  return out;
}

inline std::size_t parse_count(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end)
    throw invalid_argument("key '" + key + "': '" + v + "' is not a non-negative integer");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw invalid_argument("key '" + key + "': '" + v + "' is not a boolean");
}

}  // namespace detail

/// Applies one setting. Throws on unknown keys or malformed values.
inline void apply_setting(run_config& cfg, const std::string& key, const std::string& value) {
  using namespace detail;
  auto& c = cfg.crf;
  auto& p = cfg.proposer;
  if (key == "preset") {
    auto keep_root = cfg.dataset_root;
    auto keep_out = cfg.output_dir;
    auto keep_workers = cfg.workers;
    cfg = preset_config(value);
    cfg.dataset_root = keep_root;
    cfg.output_dir = keep_out;
    cfg.workers = keep_workers;
  } else if (key == "alpha") c.alpha = parse_double(key, value);
  else if (key == "w_appearance") c.w_appearance = parse_double(key, value);
  else if (key == "w_smooth") c.w_smooth = parse_double(key, value);
  else if (key == "w_depth") c.w_depth = parse_double(key, value);
  else if (key == "theta_alpha") c.theta_alpha = parse_double(key, value);
  else if (key == "theta_beta") c.theta_beta = parse_double(key, value);
  else if (key == "theta_gamma") c.theta_gamma = parse_double(key, value);
  else if (key == "theta_delta") c.theta_delta = parse_double(key, value);
  else if (key == "theta_epsilon") c.theta_epsilon = parse_double(key, value);
  else if (key == "iterations") c.iterations = parse_count(key, value);
  else if (key == "use_depth") c.use_depth = parse_bool(key, value);
  else if (key == "init") {
    if (value == "unary") c.init = q_init::unary;
    else if (value == "uniform") c.init = q_init::uniform;
    else throw invalid_argument("init must be unary or uniform");
  } else if (key == "kernel_norm") {
    if (value == "none") c.norm = kernel_normalization::none;
    else if (value == "symmetric") c.norm = kernel_normalization::symmetric;
    else throw invalid_argument("kernel_norm must be none or symmetric");
  } else if (key == "filter") {
    if (value == "cutoff") c.filter = filter_method::cutoff;
    else if (value == "lattice") c.filter = filter_method::lattice;
    else if (value == "bruteforce") c.filter = filter_method::bruteforce;
    else throw invalid_argument("filter must be cutoff, lattice or bruteforce");
  } else if (key == "filter_cutoff") c.filter_cutoff = parse_double(key, value);
  else if (key == "extension_fraction") p.extension_fraction = parse_double(key, value);
  else if (key == "n_min") p.n_min = parse_count(key, value);
  else if (key == "n_max") p.n_max = parse_count(key, value);
  else if (key == "connectivity") {
    const auto n = parse_count(key, value);
    if (n == 4) p.conn = connectivity::four;
    else if (n == 8) p.conn = connectivity::eight;
    else throw invalid_argument("connectivity must be 4 or 8");
  } else if (key == "depth_fill_window") cfg.depth_fill_window = parse_count(key, value);
  else if (key == "probability_floor") cfg.probability_floor = parse_double(key, value);
  else if (key == "classes") cfg.classes = parse_count(key, value);
  else if (key == "dataset_root") cfg.dataset_root = value;
  else if (key == "output_dir") cfg.output_dir = value;
  else if (key == "workers") cfg.workers = parse_count(key, value);
  else throw invalid_argument("unknown configuration key '" + key + "'");
}

/// Parsed `key = value` lines in file order.
inline std::vector<std::pair<std::string, std::string>> parse_key_values(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto text = detail::trim(line);
    if (text.empty() || text[0] == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw invalid_argument("line " + std::to_string(lineno) + ": expected key = value");
    auto key = detail::trim(std::string_view(text).substr(0, eq));
    auto value = detail::trim(std::string_view(text).substr(eq + 1));
    if (key.empty()) throw invalid_argument("line " + std::to_string(lineno) + ": empty key");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

inline run_config parse_config(std::istream& in, run_config base = {}) {
  auto entries = parse_key_values(in);
  // Presets first so that explicit keys override them.
  std::stable_partition(entries.begin(), entries.end(),
                        [](const auto& kv) { return kv.first == "preset"; });
  for (const auto& [k, v] : entries) apply_setting(base, k, v);
  base.validate();
  return base;
}

inline run_config load_config(const std::filesystem::path& path, run_config base = {}) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config " + path.string());
  return parse_config(in, std::move(base));
}

inline std::string format_config(const run_config& cfg) {
  std::ostringstream os;
  os.precision(17);
  const auto& c = cfg.crf;
  const auto& p = cfg.proposer;
  os << "preset = " << cfg.preset << '\n'
     << "alpha = " << c.alpha << '\n'
     << "w_appearance = " << c.w_appearance << '\n'
     << "w_smooth = " << c.w_smooth << '\n'
     << "w_depth = " << c.w_depth << '\n'
     << "theta_alpha = " << c.theta_alpha << '\n'
     << "theta_beta = " << c.theta_beta << '\n'
     << "theta_gamma = " << c.theta_gamma << '\n'
     << "theta_delta = " << c.theta_delta << '\n'
     << "theta_epsilon = " << c.theta_epsilon << '\n'
     << "iterations = " << c.iterations << '\n'
     << "use_depth = " << (c.use_depth ? "true" : "false") << '\n'
     << "init = " << (c.init == q_init::unary ? "unary" : "uniform") << '\n'
     << "kernel_norm = " << (c.norm == kernel_normalization::none ? "none" : "symmetric") << '\n'
     << "filter = "
     << (c.filter == filter_method::cutoff    ? "cutoff"
         : c.filter == filter_method::lattice ? "lattice"
                                              : "bruteforce")
     << '\n'
     << "filter_cutoff = " << c.filter_cutoff << '\n'
     << "extension_fraction = " << p.extension_fraction << '\n'
     << "n_min = " << p.n_min << '\n'
     << "n_max = " << p.n_max << '\n'
     << "connectivity = " << static_cast<int>(p.conn) << '\n'
     << "depth_fill_window = " << cfg.depth_fill_window << '\n'
     << "probability_floor = " << cfg.probability_floor << '\n'
     << "classes = " << cfg.classes << '\n';
  return os.str();
}

}  // namespace mlcrf

#endif  // MLCRF_CONFIG_HPP_
