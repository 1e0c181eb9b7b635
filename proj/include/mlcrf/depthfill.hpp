// Copyright 2026 The mlcrf Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef MLCRF_DEPTHFILL_HPP_
#define MLCRF_DEPTHFILL_HPP_

#include <algorithm>
#include <cstddef>
#include <vector>

#include "mlcrf/raster.hpp"

namespace mlcrf {

inline constexpr std::size_t default_fill_window = 5;

struct depth_fill_trace {
  depth_field filled;
  /// Missing-pixel count after each pass; strictly decreasing, ends at 0.
  std::vector<std::size_t> missing_after_pass;
};

/// Fills holes by repeated median filtering. Each pass replaces every missing
/// pixel that has at least one valid pixel inside the window by the lower
/// median of those valid pixels, reading only the previous pass's state.
inline depth_fill_trace fill_missing_traced(const depth_field& depth,
                                            std::size_t window = default_fill_window) {
  if (window < 3 || window % 2 == 0)
    throw invalid_argument("depth fill window must be odd and >= 3");
  const std::size_t w = depth.width();
  const std::size_t h = depth.height();
  const std::size_t n = depth.pixel_count();
  std::size_t remaining = depth.missing_count();
  if (remaining == n) throw invalid_argument("depth field has no valid pixels to fill from");

  std::vector<float> cur(depth.data().begin(), depth.data().end());
  std::vector<std::uint8_t> valid(n);
  for (std::size_t i = 0; i < n; ++i) valid[i] = depth.missing(i) ? 0 : 1;

  depth_fill_trace trace;
  const auto radius = static_cast<std::ptrdiff_t>(window / 2);
  std::vector<float> sample;
  sample.reserve(window * window);

  while (remaining > 0) {
    std::vector<float> next = cur;
    std::vector<std::uint8_t> next_valid = valid;
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t c = 0; c < w; ++c) {
        const std::size_t i = r * w + c;
        if (valid[i]) continue;
        sample.clear();
        const auto r0 = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(r) - radius);
        const auto r1 = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(h) - 1,
                                                 static_cast<std::ptrdiff_t>(r) + radius);
        const auto c0 = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(c) - radius);
        const auto c1 = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(w) - 1,
                                                 static_cast<std::ptrdiff_t>(c) + radius);
        for (auto rr = r0; rr <= r1; ++rr)
          for (auto cc = c0; cc <= c1; ++cc) {
            const auto j = static_cast<std::size_t>(rr) * w + static_cast<std::size_t>(cc);
            if (valid[j]) sample.push_back(cur[j]);
          }
        if (sample.empty()) continue;
        // Lower median keeps filled depths inside the observed value set.
        const auto mid = sample.begin() + static_cast<std::ptrdiff_t>((sample.size() - 1) / 2);
        std::nth_element(sample.begin(), mid, sample.end());
        next[i] = *mid;
        next_valid[i] = 1;
        --remaining;
      }
    }
    cur.swap(next);
    valid.swap(next_valid);
    trace.missing_after_pass.push_back(remaining);
  }
  trace.filled = depth_field(w, h, std::move(cur));
  return trace;
}

inline depth_field fill_missing(const depth_field& depth,
                                std::size_t window = default_fill_window) {
  return fill_missing_traced(depth, window).filled;
}

}  // namespace mlcrf

#endif  // MLCRF_DEPTHFILL_HPP_
