// Copyright 2026 The mlcrf Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef MLCRF_GAUSSIAN_FILTER_HPP_
#define MLCRF_GAUSSIAN_FILTER_HPP_

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <unordered_map>
#include <vector>

#include "mlcrf/raster.hpp"

namespace mlcrf {

/// Points in a kernel's feature space, already divided by the bandwidths so
/// the kernel is exp(-|f_i - f_j|^2 / 2).
class feature_set {
 public:
  feature_set() = default;
  feature_set(std::size_t dim, std::vector<double> coords)
      : dim_(dim), coords_(std::move(coords)) {
    if (dim_ == 0) throw invalid_argument("feature dimension must be >= 1");
    if (coords_.size() % dim_ != 0)
      throw dimension_error("feature coordinates are not a multiple of the dimension");
    for (double v : coords_)
      if (!std::isfinite(v)) throw invalid_argument("feature coordinates must be finite");
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return dim_ ? coords_.size() / dim_ : 0; }
  std::span<const double> point(std::size_t i) const noexcept {
    return std::span<const double>(coords_).subspan(i * dim_, dim_);
  }
  std::span<const double> coords() const noexcept { return coords_; }

  double squared_distance(std::size_t i, std::size_t j) const noexcept {
    const double* a = coords_.data() + i * dim_;
    const double* b = coords_.data() + j * dim_;
    double d2 = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) {
      const double d = a[k] - b[k];
      d2 += d * d;
    }
    return d2;
  }

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
};

/// A filter built once for a feature set and applied to many value fields.
/// `values` holds `value_dim` entries per point, point-major.
template <typename F>
concept gaussian_filter = requires(const F& f, std::span<const double> v, std::size_t d) {
  { f.apply(v, d) } -> std::same_as<std::vector<double>>;
  { f.size() } -> std::convertible_to<std::size_t>;
};

namespace detail {

inline void check_values(std::size_t points, std::span<const double> values,
                         std::size_t value_dim) {
  if (value_dim == 0 || values.size() != points * value_dim)
    throw dimension_error("value count does not match feature count");
}

}  // namespace detail

/// out_i = sum_j exp(-|f_i - f_j|^2 / 2) v_j, exact, self term included.
inline std::vector<double> gaussian_filter_bruteforce(const feature_set& features,
                                                      std::span<const double> values,
                                                      std::size_t value_dim = 1) {
  const std::size_t n = features.size();
  detail::check_values(n, values, value_dim);
  std::vector<double> out(values.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double* o = out.data() + i * value_dim;
    for (std::size_t j = 0; j < n; ++j) {
      const double w = std::exp(-0.5 * features.squared_distance(i, j));
      const double* v = values.data() + j * value_dim;
      for (std::size_t k = 0; k < value_dim; ++k) o[k] += w * v[k];
    }
  }
  return out;
}

class bruteforce_filter {
 public:
  explicit bruteforce_filter(feature_set features) : features_(std::move(features)) {}
  std::size_t size() const noexcept { return features_.size(); }
  std::vector<double> apply(std::span<const double> values, std::size_t value_dim) const {
    return gaussian_filter_bruteforce(features_, values, value_dim);
  }

 private:
  feature_set features_;
};

inline constexpr double default_filter_cutoff = 6.0;

/// Gaussian filter truncated at a feature-space radius. Points are binned
/// into a uniform grid whose cell width is the cutoff, so each point only
/// meets the 3^D neighboring cells. Every pair within the cutoff is weighted
/// exactly; dropped pairs weigh less than exp(-cutoff^2 / 2) each.
///
/// Pair weights are computed once at construction and reused by apply().
class cutoff_filter {
 public:
  explicit cutoff_filter(const feature_set& features,
                         double cutoff = default_filter_cutoff)
      : size_(features.size()) {
    if (!(cutoff > 0.0)) throw invalid_argument("filter cutoff must be positive");
    if (size_ > std::numeric_limits<std::uint32_t>::max())
      throw dimension_error("too many points for cutoff filter");
    build(features, cutoff);
  }

  std::size_t size() const noexcept { return size_; }
  std::size_t pair_count() const noexcept { return pairs_.size(); }

  std::vector<double> apply(std::span<const double> values, std::size_t value_dim) const {
    detail::check_values(size_, values, value_dim);
    std::vector<double> out(values.begin(), values.end());  // self term
    for (const auto& p : pairs_) {
      const double w = p.weight;
      double* oi = out.data() + std::size_t{p.i} * value_dim;
      double* oj = out.data() + std::size_t{p.j} * value_dim;
      const double* vi = values.data() + std::size_t{p.i} * value_dim;
      const double* vj = values.data() + std::size_t{p.j} * value_dim;
      for (std::size_t k = 0; k < value_dim; ++k) {
        oi[k] += w * vj[k];
        oj[k] += w * vi[k];
      }
    }
    return out;
  }

 private:
  struct pair {
    std::uint32_t i;
    std::uint32_t j;
    float weight;
  };

  void build(const feature_set& f, double cutoff) {
    const std::size_t n = f.size();
    const std::size_t d = f.dim();
    if (n < 2) return;

    std::vector<double> lo(d, std::numeric_limits<double>::infinity());
    std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i) {
      auto p = f.point(i);
      for (std::size_t k = 0; k < d; ++k) {
        lo[k] = std::min(lo[k], p[k]);
        hi[k] = std::max(hi[k], p[k]);
      }
    }

    // Cells may be wider than the cutoff when the grid would not fit a 64-bit
    // key; wider cells only add candidates.
    double cell = cutoff;
    std::vector<std::uint64_t> extent(d);
    for (;;) {
      long double product = 1.0L;
      for (std::size_t k = 0; k < d; ++k) {
        extent[k] = static_cast<std::uint64_t>(std::floor((hi[k] - lo[k]) / cell)) + 1;
        product *= static_cast<long double>(extent[k]);
      }
      if (product < 1e18L) break;
      cell *= 2.0;
    }

    std::vector<std::uint64_t> coord(n * d);
    std::vector<std::uint64_t> key(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto p = f.point(i);
      std::uint64_t k = 0;
      for (std::size_t a = 0; a < d; ++a) {
        const auto c = std::min<std::uint64_t>(
            static_cast<std::uint64_t>(std::floor((p[a] - lo[a]) / cell)), extent[a] - 1);
        coord[i * d + a] = c;
        k = k * extent[a] + c;
      }
      key[i] = k;
    }

    std::vector<std::uint32_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return key[a] < key[b]; });

    struct cell_range {
      std::size_t begin, end;
    };
    std::vector<cell_range> cells;
    std::unordered_map<std::uint64_t, std::size_t> lookup;
    for (std::size_t s = 0; s < n;) {
      std::size_t e = s;
      while (e < n && key[order[e]] == key[order[s]]) ++e;
      lookup.emplace(key[order[s]], cells.size());
      cells.push_back({s, e});
      s = e;
    }

    std::size_t offsets = 1;
    for (std::size_t a = 0; a < d; ++a) offsets *= 3;

    const double r2 = cutoff * cutoff;
    std::vector<std::int64_t> step(d);
    for (const auto& ca : cells) {
      const std::uint64_t* base = coord.data() + std::size_t{order[ca.begin]} * d;
      for (std::size_t o = 0; o < offsets; ++o) {
        std::size_t rest = o;
        bool inside = true;
        std::uint64_t nk = 0;
        for (std::size_t a = 0; a < d; ++a) {
          const auto delta = static_cast<std::int64_t>(rest % 3) - 1;
          rest /= 3;
          const auto c = static_cast<std::int64_t>(base[a]) + delta;
          if (c < 0 || c >= static_cast<std::int64_t>(extent[a])) {
            inside = false;
            break;
          }
          nk = nk * extent[a] + static_cast<std::uint64_t>(c);
        }
        if (!inside) continue;
        const auto it = lookup.find(nk);
        if (it == lookup.end()) continue;
        const auto& cb = cells[it->second];
        for (std::size_t x = ca.begin; x < ca.end; ++x) {
          const std::uint32_t i = order[x];
          for (std::size_t y = cb.begin; y < cb.end; ++y) {
            const std::uint32_t j = order[y];
            if (j <= i) continue;
            const double d2 = f.squared_distance(i, j);
            if (d2 < r2) pairs_.push_back({i, j, static_cast<float>(std::exp(-0.5 * d2))});
          }
        }
      }
    }
  }

  std::size_t size_ = 0;
  std::vector<pair> pairs_;
};

/// Default fast path: truncated filter at `default_filter_cutoff`.
inline std::vector<double> gaussian_filter_fast(const feature_set& features,
                                                std::span<const double> values,
                                                std::size_t value_dim = 1) {
  return cutoff_filter(features).apply(values, value_dim);
}

}  // namespace mlcrf

#endif  // MLCRF_GAUSSIAN_FILTER_HPP_
