// Copyright 2026 The mlcrf Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef MLCRF_PROPOSER_HPP_
#define MLCRF_PROPOSER_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <tuple>
#include <vector>

#include "mlcrf/raster.hpp"
#include "mlcrf/unary.hpp"

namespace mlcrf {

enum class connectivity : int { four = 4, eight = 8 };

/// Inclusive-exclusive pixel rectangle.
struct box {
  std::size_t top = 0;
  std::size_t left = 0;
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t bottom() const noexcept { return top + height; }
  std::size_t right() const noexcept { return left + width; }
  std::size_t area() const noexcept { return height * width; }

  /// True when the two rectangles share at least one pixel.
  bool overlaps(const box& o) const noexcept {
    return top < o.bottom() && o.top < bottom() && left < o.right() &&
           o.left < right();
  }

  box united(const box& o) const noexcept {
    const std::size_t t = std::min(top, o.top);
    const std::size_t l = std::min(left, o.left);
    return {t, l, std::max(bottom(), o.bottom()) - t, std::max(right(), o.right()) - l};
  }

  friend bool operator==(const box&, const box&) = default;
};

struct component {
  std::size_t id = 0;
  std::size_t pixel_count = 0;
  box bounds;
};

struct component_map {
  static constexpr std::int32_t background = -1;
  std::size_t width = 0;
  std::size_t height = 0;
  /// Component id per pixel, or `background`.
  std::vector<std::int32_t> ids;
  std::vector<component> components;
};

namespace detail {

class disjoint_sets {
 public:
  std::size_t make_set() {
    parent_.push_back(parent_.size());
    return parent_.size() - 1;
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void join(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent_[a] = b;  // smaller root wins, keeps ids in raster order
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace detail

/// Two-pass union-find labeling of the nonzero pixels. Component ids follow
/// raster order of each component's first pixel.
inline component_map connected_components(const label_field& labels,
                                           connectivity conn = connectivity::eight) {
  const std::size_t w = labels.width();
  const std::size_t h = labels.height();
  component_map out;
  out.width = w;
  out.height = h;
  out.ids.assign(w * h, component_map::background);

  detail::disjoint_sets sets;
  std::vector<std::size_t> provisional(w * h, 0);
  auto fg = [&](std::ptrdiff_t r, std::ptrdiff_t c) {
    return r >= 0 && c >= 0 && c < static_cast<std::ptrdiff_t>(w) &&
           labels(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) != 0;
  };

  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      if (labels(r, c) == 0) continue;
      const auto ri = static_cast<std::ptrdiff_t>(r);
      const auto ci = static_cast<std::ptrdiff_t>(c);
      std::size_t found = 0;
      std::size_t label = 0;
      auto visit = [&](std::ptrdiff_t rr, std::ptrdiff_t cc) {
        if (!fg(rr, cc)) return;
        const std::size_t other = provisional[static_cast<std::size_t>(rr) * w +
                                              static_cast<std::size_t>(cc)];
        if (found++ == 0)
          label = other;
        else
          sets.join(label, other);
      };
      visit(ri, ci - 1);
      visit(ri - 1, ci);
      if (conn == connectivity::eight) {
        visit(ri - 1, ci - 1);
        visit(ri - 1, ci + 1);
      }
      provisional[r * w + c] = found ? label : sets.make_set();
    }
  }

  std::vector<std::int32_t> root_to_id;
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      if (labels(r, c) == 0) continue;
      const std::size_t root = sets.find(provisional[r * w + c]);
      if (root >= root_to_id.size()) root_to_id.resize(root + 1, -1);
      if (root_to_id[root] < 0) {
        root_to_id[root] = static_cast<std::int32_t>(out.components.size());
        out.components.push_back({out.components.size(), 0, {r, c, 1, 1}});
      }
      const auto id = root_to_id[root];
      out.ids[r * w + c] = id;
      auto& comp = out.components[static_cast<std::size_t>(id)];
      ++comp.pixel_count;
      comp.bounds = comp.bounds.united({r, c, 1, 1});
    }
  }
  return out;
}

struct proposer_config {
  double extension_fraction = 0.30;
  std::size_t n_min = 900;
  std::size_t n_max = 40000;
  connectivity conn = connectivity::eight;

  void validate() const {
    if (!(extension_fraction >= 0.0))
      throw invalid_argument("extension fraction must be >= 0");
    if (n_min == 0 || n_min >= n_max)
      throw invalid_argument("proposal size limits need 0 < n_min < n_max");
  }
};

struct region_proposal {
  box bounds;
  std::vector<std::size_t> source_component_ids;

  region_translation translation() const noexcept {
    return {bounds.top, bounds.left, bounds.height, bounds.width};
  }

  friend bool operator==(const region_proposal&, const region_proposal&) = default;
};

/// Round-half-up of fraction * extent, the per-side growth of a tight box.
inline std::size_t extension_amount(double fraction, std::size_t extent) {
  // The epsilon absorbs representation error such as 0.3 * 15 = 4.4999...
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(extent) + 0.5 + 1e-9));
}

/// Grows a tight box on all four sides, truncated at the image boundary.
inline box extend_box(const box& tight, double fraction, std::size_t image_width,
                      std::size_t image_height) {
  const std::size_t dy = extension_amount(fraction, tight.height);
  const std::size_t dx = extension_amount(fraction, tight.width);
  const std::size_t top = tight.top > dy ? tight.top - dy : 0;
  const std::size_t left = tight.left > dx ? tight.left - dx : 0;
  const std::size_t bottom = std::min(tight.bottom() + dy, image_height);
  const std::size_t right = std::min(tight.right() + dx, image_width);
  return {top, left, bottom - top, right - left};
}

/// Replaces overlapping pairs by their union until no two boxes overlap.
inline std::vector<region_proposal> merge_overlapping(std::vector<region_proposal> boxes) {
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t a = 0; a < boxes.size() && !merged; ++a) {
      for (std::size_t b = a + 1; b < boxes.size(); ++b) {
        if (!boxes[a].bounds.overlaps(boxes[b].bounds)) continue;
        boxes[a].bounds = boxes[a].bounds.united(boxes[b].bounds);
        auto& ids = boxes[a].source_component_ids;
        ids.insert(ids.end(), boxes[b].source_component_ids.begin(),
                   boxes[b].source_component_ids.end());
        std::sort(ids.begin(), ids.end());
        boxes.erase(boxes.begin() + static_cast<std::ptrdiff_t>(b));
        merged = true;
        break;
      }
    }
  }
  return boxes;
}

/// Object regions from a binary coarse labeling: component boxes, extended,
/// merged, then size-filtered. Sorted by (top, left).
inline std::vector<region_proposal> propose(const label_field& labels,
                                            const proposer_config& cfg) {
  cfg.validate();
  const auto cc = connected_components(labels, cfg.conn);
  std::vector<region_proposal> boxes;
  boxes.reserve(cc.components.size());
  for (const auto& comp : cc.components)
    boxes.push_back({extend_box(comp.bounds, cfg.extension_fraction, labels.width(),
                                labels.height()),
                     {comp.id}});

  boxes = merge_overlapping(std::move(boxes));
  std::erase_if(boxes, [&](const region_proposal& p) {
    return p.bounds.area() < cfg.n_min || p.bounds.area() > cfg.n_max;
  });
  std::sort(boxes.begin(), boxes.end(), [](const auto& a, const auto& b) {
    return std::tie(a.bounds.top, a.bounds.left) < std::tie(b.bounds.top, b.bounds.left);
  });
  return boxes;
}

}  // namespace mlcrf

#endif  // MLCRF_PROPOSER_HPP_
