// Copyright 2026 The mlcrf Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef MLCRF_UNARY_HPP_
#define MLCRF_UNARY_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "mlcrf/raster.hpp"

namespace mlcrf {

inline constexpr double default_probability_floor = 1e-8;

/// Per-pixel, per-class cost in nats (negative log-probability).
class unary_field : public raster<double> {
 public:
  unary_field() = default;
  unary_field(std::size_t width, std::size_t height, std::size_t classes,
              std::vector<double> data)
      : raster(width, height, classes, std::move(data)) {
    for (double v : this->data())
      if (!std::isfinite(v) || v < 0.0)
        throw format_error("unary entries must be finite and >= 0");
  }
  std::size_t classes() const noexcept { return channels(); }
};

/// Maps image coordinates into a proposal region's own grid.
struct region_translation {
  std::size_t offset_row = 0;
  std::size_t offset_col = 0;
  std::size_t region_height = 0;
  std::size_t region_width = 0;

  bool contains(std::size_t row, std::size_t col) const noexcept {
    return row >= offset_row && row < offset_row + region_height &&
           col >= offset_col && col < offset_col + region_width;
  }
  std::size_t to_region_row(std::size_t row) const noexcept { return row - offset_row; }
  std::size_t to_region_col(std::size_t col) const noexcept { return col - offset_col; }

  bool overlaps(const region_translation& o) const noexcept {
    return offset_row < o.offset_row + o.region_height &&
           o.offset_row < offset_row + region_height &&
           offset_col < o.offset_col + o.region_width &&
           o.offset_col < offset_col + region_width;
  }

  friend bool operator==(const region_translation&,
                         const region_translation&) = default;
};

/// Max-subtracted softmax over each pixel's logit vector.
inline probability_field softmax(const logit_field& logits) {
  const std::size_t c = logits.classes();
  std::vector<float> out(logits.data().size());
  std::vector<double> e(c);
  for (std::size_t i = 0; i < logits.pixel_count(); ++i) {
    auto px = logits.pixel(i);
    double top = px[0];
    for (double v : px) {
      if (!std::isfinite(v)) throw format_error("softmax input must be finite");
      top = std::max(top, v);
    }
    double z = 0.0;
    for (std::size_t k = 0; k < c; ++k) z += e[k] = std::exp(px[k] - top);
    for (std::size_t k = 0; k < c; ++k)
      out[i * c + k] = static_cast<float>(e[k] / z);
  }
  return probability_field(logits.width(), logits.height(), c, std::move(out));
}

inline unary_field to_unary(const probability_field& probs,
                            double floor = default_probability_floor) {
  if (!(floor > 0.0) || floor >= 1.0 / static_cast<double>(probs.classes()))
    throw invalid_argument("probability floor must lie in (0, 1/C)");
  std::vector<double> out(probs.data().size());
  auto p = probs.data();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = -std::log(std::max<double>(p[i], floor));
  return unary_field(probs.width(), probs.height(), probs.classes(), std::move(out));
}

/// Replaces the scene unary inside each region by that region's own unary.
inline unary_field fuse_object_unary(
    const unary_field& scene,
    const std::vector<std::pair<region_translation, unary_field>>& regions) {
  for (std::size_t a = 0; a < regions.size(); ++a) {
    const auto& [t, u] = regions[a];
    if (t.region_height == 0 || t.region_width == 0 ||
        t.offset_row + t.region_height > scene.height() ||
        t.offset_col + t.region_width > scene.width())
      throw dimension_error("region " + std::to_string(a) + " lies outside the image");
    if (!u.same_grid(t.region_width, t.region_height))
      throw dimension_error("region " + std::to_string(a) +
                            " unary does not match its footprint");
    if (u.classes() != scene.classes())
      throw dimension_error("region " + std::to_string(a) + " has a different class count");
    for (std::size_t b = 0; b < a; ++b)
      if (t.overlaps(regions[b].first))
        throw invalid_argument("regions " + std::to_string(b) + " and " +
                               std::to_string(a) + " overlap");
  }

  std::vector<double> out(scene.data().begin(), scene.data().end());
  const std::size_t c = scene.classes();
  for (const auto& [t, u] : regions) {
    for (std::size_t r = 0; r < t.region_height; ++r) {
      for (std::size_t col = 0; col < t.region_width; ++col) {
        const std::size_t dst = ((t.offset_row + r) * scene.width() + t.offset_col + col) * c;
        for (std::size_t k = 0; k < c; ++k) out[dst + k] = u(r, col, k);
      }
    }
  }
  return unary_field(scene.width(), scene.height(), c, std::move(out));
}

/// Bilinear resize on pixel centers, followed by per-pixel renormalization.
inline probability_field resample_bilinear(const probability_field& field,
                                           std::size_t new_width,
                                           std::size_t new_height) {
  if (new_width == 0 || new_height == 0)
    throw invalid_argument("resample target must be at least 1x1");
  const std::size_t c = field.classes();
  const std::size_t w = field.width();
  const std::size_t h = field.height();

  struct tap {
    std::size_t lo, hi;
    double frac;
  };
  auto taps = [](std::size_t in, std::size_t out) {
    std::vector<tap> t(out);
    const double scale = static_cast<double>(in) / static_cast<double>(out);
    for (std::size_t d = 0; d < out; ++d) {
      double s = (static_cast<double>(d) + 0.5) * scale - 0.5;
      s = std::clamp(s, 0.0, static_cast<double>(in - 1));
      const auto lo = static_cast<std::size_t>(std::floor(s));
      const std::size_t hi = std::min(lo + 1, in - 1);
      t[d] = {lo, hi, s - static_cast<double>(lo)};
    }
    return t;
  };
  const auto xs = taps(w, new_width);
  const auto ys = taps(h, new_height);

  std::vector<float> out(new_width * new_height * c);
  std::vector<double> acc(c);
  for (std::size_t y = 0; y < new_height; ++y) {
    const auto& ty = ys[y];
    for (std::size_t x = 0; x < new_width; ++x) {
      const auto& tx = xs[x];
      double total = 0.0;
      for (std::size_t k = 0; k < c; ++k) {
        const double top = (1.0 - tx.frac) * field(ty.lo, tx.lo, k) + tx.frac * field(ty.lo, tx.hi, k);
        const double bot = (1.0 - tx.frac) * field(ty.hi, tx.lo, k) + tx.frac * field(ty.hi, tx.hi, k);
        acc[k] = (1.0 - ty.frac) * top + ty.frac * bot;
        total += acc[k];
      }
      for (std::size_t k = 0; k < c; ++k)
        out[(y * new_width + x) * c + k] = static_cast<float>(acc[k] / total);
    }
  }
  return probability_field(new_width, new_height, c, std::move(out));
}

/// Combined data term used by inference: scene + alpha * fused.
inline unary_field combine_unaries(const unary_field& scene,
                                   const unary_field& fused, double alpha) {
  if (!scene.same_shape(fused))
    throw dimension_error("scene and fused unaries differ in shape");
  std::vector<double> out(scene.data().size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = scene.data()[i] + alpha * fused.data()[i];
  return unary_field(scene.width(), scene.height(), scene.classes(), std::move(out));
}

}  // namespace mlcrf

#endif  // MLCRF_UNARY_HPP_
