// Copyright 2026 The mlcrf Authors
// SPDX-License-Identifier: Apache-2.0

// Synthetic RGBD scenes standing in for trained segmentation networks.
//
// Each scene holds one or two ellipse/rectangle objects on a textured
// background. The coarse logits come from a blurred, biased and noise-
// perturbed copy of the truth mask, so they are mostly right but wrong near
// boundaries. Region logits are rendered at twice the resolution of the
// proposal footprint with much milder degradation, mimicking a fine model run
// on zoomed crops.

#ifndef MLCRF_SYNTH_HPP_
#define MLCRF_SYNTH_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mlcrf/proposer.hpp"
#include "mlcrf/raster.hpp"

namespace mlcrf {

struct synth_options {
  std::uint64_t seed = 1;
  std::size_t count = 20;
  std::size_t size = 64;
  double noise = 1.0;
  /// Objects share the background's color statistics and differ only in depth.
  bool camouflage = false;
};

struct synth_shape {
  bool ellipse = true;
  double cy = 0, cx = 0;      // center, pixel units (pixel (r, c) spans [r, r+1))
  double ry = 0, rx = 0;      // semi-axes / half sizes
  double angle = 0;           // radians

  bool contains(double y, double x) const noexcept {
    const double dy = y - cy;
    const double dx = x - cx;
    const double u = std::cos(angle) * dx + std::sin(angle) * dy;
    const double v = -std::sin(angle) * dx + std::cos(angle) * dy;
    if (ellipse) return (u * u) / (rx * rx) + (v * v) / (ry * ry) <= 1.0;
    return std::abs(u) <= rx && std::abs(v) <= ry;
  }
};

struct synthetic_scene {
  std::string id;
  color_field color;
  depth_field depth;  // with holes
  label_field truth;
  logit_field scene_logits;
  std::vector<synth_shape> objects;
  double noise = 1.0;
  std::uint64_t fine_seed = 0;
};

inline constexpr double synth_logit_gain = 12.0;

namespace detail {

inline std::vector<double> gaussian_taps(double sigma) {
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
    const double w = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
    taps[static_cast<std::size_t>(i + radius)] = w;
    sum += w;
  }
  for (auto& t : taps) t /= sum;
  return taps;
}

/// Separable Gaussian blur with clamped borders. sigma <= 0 is a no-op.
inline void blur(std::vector<double>& f, std::size_t w, std::size_t h, double sigma) {
  if (!(sigma > 0.0)) return;
  const auto taps = gaussian_taps(sigma);
  const auto radius = static_cast<std::ptrdiff_t>(taps.size() / 2);
  std::vector<double> tmp(f.size());
  auto clampi = [](std::ptrdiff_t v, std::size_t n) {
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(v, 0, static_cast<std::ptrdiff_t>(n) - 1));
  };
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c) {
      double s = 0.0;
      for (std::ptrdiff_t k = -radius; k <= radius; ++k)
        s += taps[static_cast<std::size_t>(k + radius)] *
             f[r * w + clampi(static_cast<std::ptrdiff_t>(c) + k, w)];
      tmp[r * w + c] = s;
    }
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c) {
      double s = 0.0;
      for (std::ptrdiff_t k = -radius; k <= radius; ++k)
        s += taps[static_cast<std::size_t>(k + radius)] *
             tmp[clampi(static_cast<std::ptrdiff_t>(r) + k, h) * w + c];
      f[r * w + c] = s;
    }
}

/// Spatially correlated noise with unit standard deviation.
template <typename Rng>
std::vector<double> smooth_noise(Rng& rng, std::size_t w, std::size_t h, double sigma) {
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<double> f(w * h);
  for (auto& v : f) v = n01(rng);
  blur(f, w, h, sigma);
  double m = 0.0, s2 = 0.0;
  for (double v : f) m += v;
  m /= static_cast<double>(f.size());
  for (double v : f) s2 += (v - m) * (v - m);
  const double sd = std::sqrt(s2 / static_cast<double>(f.size()));
  for (auto& v : f) v = sd > 0.0 ? (v - m) / sd : 0.0;
  return f;
}

inline std::mt19937_64 stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                              std::uint64_t c = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                    static_cast<std::uint32_t>(c)};
  return std::mt19937_64(seq);
}

inline std::uint8_t to_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

/// Two-class logits [-l/2, +l/2] with l = gain * (soft - 0.5 + offset).
inline logit_field soft_to_logits(std::size_t w, std::size_t h, const std::vector<double>& soft,
                                  const std::vector<double>& offset) {
  std::vector<double> out(w * h * 2);
  for (std::size_t i = 0; i < w * h; ++i) {
    const double l = synth_logit_gain * (soft[i] - 0.5 + offset[i]);
    out[2 * i] = static_cast<float>(-0.5 * l);
    out[2 * i + 1] = static_cast<float>(0.5 * l);
  }
  return logit_field(w, h, 2, std::move(out));
}

}  // namespace detail

inline std::string synthetic_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scene_%04zu", index);
  return buf;
}

inline synthetic_scene make_synthetic_scene(const synth_options& opt, std::size_t index) {
  if (opt.size < 16) throw invalid_argument("synthetic scenes need size >= 16");
  if (!(opt.noise >= 0.0)) throw invalid_argument("noise level must be >= 0");
  const std::size_t s = opt.size;
  const auto sd = static_cast<double>(s);
  auto rng = detail::stream(opt.seed, index, 0x5ce9e);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> n01(0.0, 1.0);
  auto uniform = [&](double a, double b) { return a + (b - a) * u01(rng); };

  synthetic_scene sc;
  sc.id = synthetic_id(index);
  sc.noise = opt.noise;

  const std::size_t n_objects = u01(rng) < 0.35 ? 2 : 1;
  for (std::size_t k = 0; k < n_objects; ++k) {
    synth_shape sh;
    sh.ellipse = u01(rng) < 0.6;
    sh.ry = uniform(0.15, 0.25) * sd;
    sh.rx = uniform(0.15, 0.25) * sd;
    if (!sh.ellipse) {
      sh.ry *= 0.85;
      sh.rx *= 0.85;
    }
    sh.angle = uniform(0.0, 3.14159265358979);
    const double reach = std::max(sh.rx, sh.ry) + 2.0;
    sh.cy = uniform(reach, sd - reach);
    sh.cx = uniform(reach, sd - reach);
    sc.objects.push_back(sh);
  }

  // Colors.
  std::array<double, 3> bg{};
  for (auto& c : bg) c = uniform(60.0, 200.0);
  std::vector<std::array<double, 3>> fg(n_objects);
  for (auto& col : fg) {
    if (opt.camouflage) {
      for (std::size_t c = 0; c < 3; ++c) col[c] = bg[c] + uniform(-8.0, 8.0);
    } else {
      double dist = 0.0;
      while (dist < 100.0) {
        for (auto& c : col) c = uniform(20.0, 235.0);
        dist = std::sqrt((col[0] - bg[0]) * (col[0] - bg[0]) + (col[1] - bg[1]) * (col[1] - bg[1]) +
                         (col[2] - bg[2]) * (col[2] - bg[2]));
      }
    }
  }
  const double obj_texture = opt.camouflage ? 10.0 : 6.0;
  const auto bg_field = detail::smooth_noise(rng, s, s, 6.0);

  // Depth planes.
  const double bg_depth = uniform(1300.0, 1700.0);
  const double bg_tilt = uniform(-150.0, 150.0);
  std::vector<double> obj_depth(n_objects), obj_tilt(n_objects);
  for (std::size_t k = 0; k < n_objects; ++k) {
    obj_depth[k] = uniform(700.0, 1100.0);
    obj_tilt[k] = uniform(-40.0, 40.0);
  }

  std::vector<std::uint8_t> rgb(s * s * 3);
  std::vector<float> depth(s * s);
  std::vector<label_type> truth(s * s, 0);
  for (std::size_t r = 0; r < s; ++r) {
    for (std::size_t c = 0; c < s; ++c) {
      const std::size_t i = r * s + c;
      const double y = static_cast<double>(r) + 0.5;
      const double x = static_cast<double>(c) + 0.5;
      std::ptrdiff_t owner = -1;
      for (std::size_t k = 0; k < n_objects; ++k)
        if (sc.objects[k].contains(y, x)) owner = static_cast<std::ptrdiff_t>(k);
      double d;
      if (owner < 0) {
        for (std::size_t ch = 0; ch < 3; ++ch)
          rgb[i * 3 + ch] = detail::to_u8(bg[ch] + 18.0 * bg_field[i] + 8.0 * n01(rng));
        d = bg_depth + bg_tilt * (y / sd - 0.5);
      } else {
        const auto k = static_cast<std::size_t>(owner);
        truth[i] = 1;
        for (std::size_t ch = 0; ch < 3; ++ch) {
          const double tex = opt.camouflage ? 18.0 * bg_field[i] : 0.0;
          rgb[i * 3 + ch] = detail::to_u8(fg[k][ch] + tex + obj_texture * n01(rng));
        }
        d = obj_depth[k] + obj_tilt[k] * (x / sd - 0.5);
      }
      depth[i] = static_cast<float>(std::round(std::max(1.0, d + 4.0 * n01(rng))));
    }
  }

  // Sensor dropouts: scattered pixels plus one small blob.
  for (auto& v : depth)
    if (u01(rng) < 0.03) v = 0.0F;
  {
    const auto br = static_cast<std::ptrdiff_t>(uniform(2.0, sd - 3.0));
    const auto bc = static_cast<std::ptrdiff_t>(uniform(2.0, sd - 3.0));
    for (std::ptrdiff_t dr = -2; dr <= 2; ++dr)
      for (std::ptrdiff_t dc = -2; dc <= 2; ++dc)
        if (dr * dr + dc * dc <= 4)
          depth[static_cast<std::size_t>(br + dr) * s + static_cast<std::size_t>(bc + dc)] = 0.0F;
  }

  // Coarse logits: blurred truth, a global boundary bias, correlated noise.
  std::vector<double> soft(truth.begin(), truth.end());
  detail::blur(soft, s, s, 2.5 * opt.noise);
  const double bias = opt.noise * uniform(-0.25, 0.25);
  const auto eta = detail::smooth_noise(rng, s, s, 3.0);
  std::vector<double> offset(s * s);
  for (std::size_t i = 0; i < offset.size(); ++i) offset[i] = bias + 0.3 * opt.noise * eta[i];

  sc.color = color_field(s, s, std::move(rgb));
  sc.depth = depth_field(s, s, std::move(depth));
  sc.truth = label_field(s, s, std::move(truth));
  sc.scene_logits = detail::soft_to_logits(s, s, soft, offset);
  sc.fine_seed = rng();
  return sc;
}

/// Logits a fine model would emit for `region`, at twice its resolution.
inline logit_field synthetic_region_logits(const synthetic_scene& sc, const box& region) {
  const std::size_t h = 2 * region.height;
  const std::size_t w = 2 * region.width;
  auto rng = detail::stream(sc.fine_seed, region.top, region.left,
                            (region.height << 16) | region.width);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  std::vector<double> soft(w * h, 0.0);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c)
      soft[r * w + c] = sc.truth(region.top + r / 2, region.left + c / 2);
  detail::blur(soft, w, h, 1.0 * sc.noise);
  const double bias = sc.noise * (-0.04 + 0.08 * u01(rng));
  const auto eta = detail::smooth_noise(rng, w, h, 3.0);
  std::vector<double> offset(w * h);
  for (std::size_t i = 0; i < offset.size(); ++i) offset[i] = bias + 0.08 * sc.noise * eta[i];
  return detail::soft_to_logits(w, h, soft, offset);
}

}  // namespace mlcrf

#endif  // MLCRF_SYNTH_HPP_
