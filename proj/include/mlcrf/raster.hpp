// Copyright 2026 The mlcrf Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef MLCRF_RASTER_HPP_
#define MLCRF_RASTER_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mlcrf {

/// Base for every error raised by the library.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct io_error : error {
  using error::error;
};

struct format_error : error {
  using error::error;
};

struct dimension_error : error {
  using error::error;
};

struct invalid_argument : error {
  using error::error;
};

/// Row-major, pixel-interleaved multi-channel raster with origin at top-left.
///
/// Element (row, col, ch) lives at ((row * width) + col) * channels + ch.
template <typename T>
class raster {
 public:
  using value_type = T;

  raster() = default;

  raster(std::size_t width, std::size_t height, std::size_t channels,
         T fill = T{})
      : width_(width),
        height_(height),
        channels_(channels),
        data_(width * height * channels, fill) {
    check_shape();
  }

  raster(std::size_t width, std::size_t height, std::size_t channels,
         std::vector<T> data)
      : width_(width), height_(height), channels_(channels),
        data_(std::move(data)) {
    check_shape();
    if (data_.size() != width_ * height_ * channels_)
      throw dimension_error("raster payload has " +
                            std::to_string(data_.size()) +
                            " elements, expected " +
                            std::to_string(width_ * height_ * channels_));
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept { return width_ * height_; }

  std::span<const T> data() const noexcept { return data_; }
  std::span<T> data() noexcept { return data_; }

  const T& operator()(std::size_t row, std::size_t col,
                      std::size_t ch = 0) const noexcept {
    return data_[(row * width_ + col) * channels_ + ch];
  }
  T& operator()(std::size_t row, std::size_t col, std::size_t ch = 0) noexcept {
    return data_[(row * width_ + col) * channels_ + ch];
  }

  std::span<const T> pixel(std::size_t index) const noexcept {
    return std::span<const T>(data_).subspan(index * channels_, channels_);
  }
  std::span<T> pixel(std::size_t index) noexcept {
    return std::span<T>(data_).subspan(index * channels_, channels_);
  }

  bool same_shape(const raster& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ &&
           channels_ == other.channels_;
  }

  bool same_grid(std::size_t width, std::size_t height) const noexcept {
    return width_ == width && height_ == height;
  }

  friend bool operator==(const raster&, const raster&) = default;

 private:
  void check_shape() const {
    if (width_ == 0 || height_ == 0)
      throw dimension_error("raster width and height must be >= 1");
    if (channels_ == 0)
      throw dimension_error("raster must have at least one channel");
  }

  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::size_t channels_ = 0;
  std::vector<T> data_;
};

/// 8-bit RGB image.
class color_field : public raster<std::uint8_t> {
 public:
  color_field() = default;
  color_field(std::size_t width, std::size_t height)
      : raster(width, height, 3) {}
  color_field(std::size_t width, std::size_t height,
              std::vector<std::uint8_t> rgb)
      : raster(width, height, 3, std::move(rgb)) {}
};

/// Depth in millimeters. Missing pixels hold 0 and are flagged in the mask.
class depth_field {
 public:
  depth_field() = default;

  /// Builds from raw readings; a reading of exactly 0 is treated as missing.
  depth_field(std::size_t width, std::size_t height, std::vector<float> mm)
      : values_(width, height, 1, std::move(mm)),
        missing_(width * height, 0) {
    auto v = values_.data();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!std::isfinite(v[i]) || v[i] < 0.0F)
        throw format_error("depth values must be finite and >= 0");
      if (v[i] == 0.0F) missing_[i] = 1;
    }
  }

  std::size_t width() const noexcept { return values_.width(); }
  std::size_t height() const noexcept { return values_.height(); }
  std::size_t pixel_count() const noexcept { return values_.pixel_count(); }

  std::span<const float> data() const noexcept { return values_.data(); }
  float operator()(std::size_t row, std::size_t col) const noexcept {
    return values_(row, col);
  }
  bool missing(std::size_t index) const noexcept { return missing_[index] != 0; }
  bool missing(std::size_t row, std::size_t col) const noexcept {
    return missing_[row * width() + col] != 0;
  }

  std::size_t missing_count() const noexcept {
    std::size_t n = 0;
    for (auto m : missing_) n += m;
    return n;
  }

  friend bool operator==(const depth_field&, const depth_field&) = default;

 private:
  raster<float> values_;
  std::vector<std::uint8_t> missing_;
};

/// Unnormalized per-pixel class scores.
class logit_field : public raster<double> {
 public:
  logit_field() = default;
  logit_field(std::size_t width, std::size_t height, std::size_t classes,
              std::vector<double> data)
      : raster(width, height, classes, std::move(data)) {
    for (double v : this->data())
      if (!std::isfinite(v)) throw format_error("logits must be finite");
  }
  std::size_t classes() const noexcept { return channels(); }
};

inline constexpr double probability_sum_tolerance = 1e-5;

/// Per-pixel class distributions; construction validates every pixel.
class probability_field : public raster<float> {
 public:
  probability_field() = default;
  probability_field(std::size_t width, std::size_t height, std::size_t classes,
                    std::vector<float> data)
      : raster(width, height, classes, std::move(data)) {
    if (classes < 2)
      throw dimension_error("probability field needs at least 2 classes");
    for (std::size_t i = 0; i < pixel_count(); ++i) {
      double sum = 0.0;
      for (float p : pixel(i)) {
        if (!(p >= 0.0F && p <= 1.0F))
          throw format_error("probability outside [0, 1] at pixel " +
                             std::to_string(i));
        sum += p;
      }
      if (std::abs(sum - 1.0) > probability_sum_tolerance)
        throw format_error("probabilities at pixel " + std::to_string(i) +
                           " sum to " + std::to_string(sum));
    }
  }
  std::size_t classes() const noexcept { return channels(); }
};

using label_type = std::uint8_t;

/// Per-pixel class indices; 0 is background, 1 is waste.
class label_field : public raster<label_type> {
 public:
  label_field() = default;
  label_field(std::size_t width, std::size_t height)
      : raster(width, height, 1) {}
  label_field(std::size_t width, std::size_t height,
              std::vector<label_type> labels)
      : raster(width, height, 1, std::move(labels)) {}

  label_type max_label() const noexcept {
    label_type m = 0;
    for (auto v : data()) m = v > m ? v : m;
    return m;
  }
};

}  // namespace mlcrf

#endif  // MLCRF_RASTER_HPP_
