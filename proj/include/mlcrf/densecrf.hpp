// Copyright 2026 The mlcrf Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef MLCRF_DENSECRF_HPP_
#define MLCRF_DENSECRF_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mlcrf/gaussian_filter.hpp"
#include "mlcrf/permutohedral.hpp"
#include "mlcrf/raster.hpp"
#include "mlcrf/unary.hpp"

namespace mlcrf {

enum class q_init { unary, uniform };
enum class kernel_normalization { none, symmetric };
enum class filter_method { cutoff, lattice, bruteforce };

/// Weights and bandwidths of the dense CRF energy.
///
/// Bandwidths: theta_alpha / theta_beta are the spatial (px) and color
/// (0-255 levels) scales of the appearance kernel, theta_gamma the spatial
/// scale of the smoothing kernel, theta_delta / theta_epsilon the spatial and
/// depth (mm) scales of the depth kernel.
struct crf_config {
  double alpha = 1.0;
  double w_appearance = 3.0;
  double w_smooth = 1.0;
  double w_depth = 1.0;
  double theta_alpha = 20.0;
  double theta_beta = 20.0;
  double theta_gamma = 1.0;
  double theta_delta = 10.0;
  double theta_epsilon = 20.0;
  std::size_t iterations = 10;
  bool use_depth = true;
  q_init init = q_init::unary;
  kernel_normalization norm = kernel_normalization::none;
  filter_method filter = filter_method::cutoff;
  double filter_cutoff = default_filter_cutoff;

  static crf_config mju_waste() { return {}; }

  static crf_config taco() {
    crf_config c;
    c.theta_alpha = 100.0;
    c.theta_gamma = 10.0;
    c.w_depth = 0.0;
    c.use_depth = false;
    return c;
  }

  void validate() const {
    for (double w : {alpha, w_appearance, w_smooth, w_depth})
      if (!(w >= 0.0) || !std::isfinite(w))
        throw invalid_argument("CRF weights must be finite and >= 0");
    for (double t : {theta_alpha, theta_beta, theta_gamma, theta_delta, theta_epsilon})
      if (!(t > 0.0) || !std::isfinite(t))
        throw invalid_argument("CRF bandwidths must be finite and > 0");
    if (iterations < 1) throw invalid_argument("CRF needs at least one iteration");
    if (!(filter_cutoff > 0.0)) throw invalid_argument("filter cutoff must be > 0");
  }

  friend bool operator==(const crf_config&, const crf_config&) = default;
};

enum class kernel_kind { appearance, smoothing, depth };

inline const char* to_string(kernel_kind k) {
  switch (k) {
    case kernel_kind::appearance: return "appearance";
    case kernel_kind::smoothing: return "smoothing";
    case kernel_kind::depth: return "depth";
  }
  return "?";
}

struct kernel {
  kernel_kind kind;
  double weight;
  feature_set features;
};

/// Pairwise kernels over the pixel grid, in the order appearance, smoothing,
/// depth. The depth kernel is present only when depth is given and enabled.
inline std::vector<kernel> build_kernels(const color_field& image,
                                         const depth_field* depth,
                                         const crf_config& cfg) {
  cfg.validate();
  const std::size_t w = image.width();
  const std::size_t h = image.height();
  const std::size_t n = w * h;
  const bool with_depth = depth != nullptr && cfg.use_depth;
  if (with_depth) {
    if (!(depth->width() == w && depth->height() == h))
      throw dimension_error("depth and color images differ in size");
    if (depth->missing_count() != 0)
      throw invalid_argument("depth must be hole-filled before building kernels");
  }

  std::vector<double> app(n * 5);
  std::vector<double> smooth(n * 2);
  std::vector<double> geo(with_depth ? n * 3 : 0);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const std::size_t i = r * w + c;
      const auto x = static_cast<double>(c);
      const auto y = static_cast<double>(r);
      app[i * 5 + 0] = x / cfg.theta_alpha;
      app[i * 5 + 1] = y / cfg.theta_alpha;
      for (std::size_t ch = 0; ch < 3; ++ch)
        app[i * 5 + 2 + ch] = static_cast<double>(image(r, c, ch)) / cfg.theta_beta;
      smooth[i * 2 + 0] = x / cfg.theta_gamma;
      smooth[i * 2 + 1] = y / cfg.theta_gamma;
      if (with_depth) {
        geo[i * 3 + 0] = x / cfg.theta_delta;
        geo[i * 3 + 1] = y / cfg.theta_delta;
        geo[i * 3 + 2] = static_cast<double>((*depth)(r, c)) / cfg.theta_epsilon;
      }
    }
  }

  std::vector<kernel> out;
  out.push_back({kernel_kind::appearance, cfg.w_appearance, feature_set(5, std::move(app))});
  out.push_back({kernel_kind::smoothing, cfg.w_smooth, feature_set(2, std::move(smooth))});
  if (with_depth) out.push_back({kernel_kind::depth, cfg.w_depth, feature_set(3, std::move(geo))});
  return out;
}

/// Factorized posterior: one class distribution per pixel.
class marginal_field : public raster<double> {
 public:
  marginal_field() = default;
  marginal_field(std::size_t width, std::size_t height, std::size_t classes,
                 std::vector<double> q)
      : raster(width, height, classes, std::move(q)) {}

  std::size_t classes() const noexcept { return channels(); }

  /// Largest deviation of any pixel's distribution from summing to 1.
  double max_normalization_error() const noexcept {
    double worst = 0.0;
    for (std::size_t i = 0; i < pixel_count(); ++i) {
      double s = 0.0;
      for (double v : pixel(i)) s += v;
      worst = std::max(worst, std::abs(s - 1.0));
    }
    return worst;
  }
};

namespace detail {

/// Q_i proportional to exp(-cost_i), per pixel, max-subtracted.
inline void exp_normalize(std::span<const double> cost, std::size_t classes,
                          std::span<double> q) {
  const std::size_t n = cost.size() / classes;
  for (std::size_t i = 0; i < n; ++i) {
    const double* c = cost.data() + i * classes;
    double* out = q.data() + i * classes;
    double lowest = c[0];
    for (std::size_t k = 1; k < classes; ++k) lowest = std::min(lowest, c[k]);
    double z = 0.0;
    for (std::size_t k = 0; k < classes; ++k) z += out[k] = std::exp(lowest - c[k]);
    for (std::size_t k = 0; k < classes; ++k) out[k] /= z;
  }
}

template <gaussian_filter Filter>
struct prepared_kernel {
  double weight;
  Filter filter;
  /// Symmetric normalization factors, empty when unnormalized.
  std::vector<double> scale;
};

template <gaussian_filter Filter>
prepared_kernel<Filter> prepare(const kernel& k, Filter filter,
                                kernel_normalization norm) {
  prepared_kernel<Filter> p{k.weight, std::move(filter), {}};
  if (norm == kernel_normalization::symmetric) {
    const std::vector<double> ones(p.filter.size(), 1.0);
    auto mass = p.filter.apply(ones, 1);
    p.scale.resize(mass.size());
    for (std::size_t i = 0; i < mass.size(); ++i) p.scale[i] = 1.0 / std::sqrt(mass[i] + 1e-20);
  }
  return p;
}

}  // namespace detail

using iteration_observer = std::function<void(std::size_t iteration, const marginal_field& q)>;

/// Mean-field inference with Potts compatibility. `make_filter` builds one
/// filter per kernel from its feature set.
template <typename MakeFilter>
marginal_field mean_field_with(const unary_field& unary_coarse,
                               const unary_field& unary_fused,
                               const std::vector<kernel>& kernels,
                               const crf_config& cfg, MakeFilter make_filter,
                               const iteration_observer& observe = {}) {
  cfg.validate();
  if (!unary_coarse.same_shape(unary_fused))
    throw dimension_error("coarse and fused unaries differ in shape");
  const std::size_t n = unary_coarse.pixel_count();
  const std::size_t c = unary_coarse.classes();
  for (const auto& k : kernels)
    if (k.features.size() != n)
      throw dimension_error(std::string(to_string(k.kind)) + " kernel size does not match unaries");

  const auto cost = combine_unaries(unary_coarse, unary_fused, cfg.alpha);
  std::vector<double> q(n * c);
  if (cfg.init == q_init::unary)
    detail::exp_normalize(cost.data(), c, q);
  else
    std::fill(q.begin(), q.end(), 1.0 / static_cast<double>(c));

  using filter_t = decltype(make_filter(std::declval<const feature_set&>()));
  std::vector<detail::prepared_kernel<filter_t>> active;
  for (const auto& k : kernels)
    if (k.weight > 0.0) active.push_back(detail::prepare(k, make_filter(k.features), cfg.norm));

  std::vector<double> message(n * c);
  std::vector<double> total(n * c);
  std::vector<double> scaled(n * c);
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    std::fill(message.begin(), message.end(), 0.0);
    for (const auto& pk : active) {
      const bool normalized = !pk.scale.empty();
      std::span<const double> input = q;
      if (normalized) {
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t k = 0; k < c; ++k) scaled[i * c + k] = pk.scale[i] * q[i * c + k];
        input = scaled;
      }
      const auto filtered = pk.filter.apply(input, c);
      for (std::size_t i = 0; i < n; ++i) {
        const double s = normalized ? pk.scale[i] : 1.0;
        // Remove the j == i contribution, whose kernel value is s * 1 * s.
        for (std::size_t k = 0; k < c; ++k)
          message[i * c + k] += pk.weight * s * (filtered[i * c + k] - s * q[i * c + k]);
      }
    }
    // Potts: class k pays for the mass on every other class.
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (std::size_t k = 0; k < c; ++k) sum += message[i * c + k];
      for (std::size_t k = 0; k < c; ++k)
        total[i * c + k] = cost.data()[i * c + k] + (sum - message[i * c + k]);
    }
    detail::exp_normalize(total, c, q);
    if (observe) observe(it, marginal_field(unary_coarse.width(), unary_coarse.height(), c, q));
  }
  return marginal_field(unary_coarse.width(), unary_coarse.height(), c, std::move(q));
}

inline marginal_field mean_field(const unary_field& unary_coarse,
                                 const unary_field& unary_fused,
                                 const std::vector<kernel>& kernels,
                                 const crf_config& cfg,
                                 const iteration_observer& observe = {}) {
  switch (cfg.filter) {
    case filter_method::bruteforce:
      return mean_field_with(unary_coarse, unary_fused, kernels, cfg,
                             [](const feature_set& f) { return bruteforce_filter(f); }, observe);
    case filter_method::lattice:
      return mean_field_with(unary_coarse, unary_fused, kernels, cfg,
                             [](const feature_set& f) { return permutohedral_lattice(f); },
                             observe);
    case filter_method::cutoff:
      break;
  }
  const double cutoff = cfg.filter_cutoff;
  return mean_field_with(unary_coarse, unary_fused, kernels, cfg,
                         [cutoff](const feature_set& f) { return cutoff_filter(f, cutoff); },
                         observe);
}

/// Per-pixel argmax; ties go to the lower class index.
template <typename T>
label_field map_labels(const raster<T>& q) {
  std::vector<label_type> out(q.pixel_count());
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto px = q.pixel(i);
    std::size_t best = 0;
    for (std::size_t k = 1; k < px.size(); ++k)
      if (px[k] > px[best]) best = k;
    out[i] = static_cast<label_type>(best);
  }
  return label_field(q.width(), q.height(), std::move(out));
}

inline constexpr std::size_t default_energy_cap = 64 * 64;

struct energy_terms {
  double scene = 0.0;   // sum of coarse unaries at the labeling
  double object = 0.0;  // sum of fused unaries at the labeling
  double pairwise = 0.0;
  double total = 0.0;
};

/// Exhaustive evaluation of the CRF energy for a labeling. The pairwise sum
/// runs over ordered pixel pairs, so each unordered pair counts twice.
inline energy_terms energy(const label_field& labels, const unary_field& unary_coarse,
                           const unary_field& unary_fused,
                           const std::vector<kernel>& kernels, const crf_config& cfg,
                           std::size_t cap = default_energy_cap) {
  const std::size_t n = labels.pixel_count();
  if (n > cap)
    throw invalid_argument("energy diagnostic limited to " + std::to_string(cap) + " pixels");
  if (!labels.same_grid(unary_coarse.width(), unary_coarse.height()) ||
      !unary_coarse.same_shape(unary_fused))
    throw dimension_error("labels and unaries differ in size");
  const auto x = labels.data();
  const std::size_t c = unary_coarse.classes();

  energy_terms e;
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] >= c) throw invalid_argument("label exceeds class count");
    e.scene += unary_coarse.data()[i * c + x[i]];
    e.object += unary_fused.data()[i * c + x[i]];
  }
  for (const auto& k : kernels) {
    if (k.features.size() != n) throw dimension_error("kernel size does not match labels");
    if (k.weight == 0.0) continue;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (x[i] != x[j]) sum += std::exp(-0.5 * k.features.squared_distance(i, j));
    e.pairwise += k.weight * sum;
  }
  e.total = e.scene + cfg.alpha * e.object + e.pairwise;
  return e;
}

}  // namespace mlcrf

#endif  // MLCRF_DENSECRF_HPP_
