// Copyright 2026 The mlcrf Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef MLCRF_PNG_IO_HPP_
#define MLCRF_PNG_IO_HPP_

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "mlcrf/array_io.hpp"
#include "mlcrf/raster.hpp"

namespace mlcrf {

/// Decoded PNG samples, widened to 16 bits. Palette images keep their indices
/// unless the reader was asked to expand them.
struct png_samples {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 0;
  int bit_depth = 8;
  bool palette = false;
  std::vector<std::uint16_t> values;
};

namespace detail {

struct file_closer {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using file_ptr = std::unique_ptr<std::FILE, file_closer>;

inline void png_warning_sink(png_structp, png_const_charp) {}

}  // namespace detail

inline png_samples read_png_samples(const std::filesystem::path& path,
                                    bool expand_palette) {
  detail::file_ptr file(std::fopen(path.string().c_str(), "rb"));
  if (!file) throw io_error("cannot open PNG " + path.string());

  png_byte sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw format_error(path.string() + " is not a PNG file");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           nullptr, detail::png_warning_sink);
  if (!png) throw error("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw error("png_create_info_struct failed");
  }

  png_samples out;
  std::vector<png_byte> buffer;
  std::vector<png_bytep> rows;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw format_error("cannot decode PNG " + path.string());
  }

  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const auto color_type = png_get_color_type(png, info);
  const auto depth = png_get_bit_depth(png, info);
  out.palette = color_type == PNG_COLOR_TYPE_PALETTE && !expand_palette;

  if (color_type == PNG_COLOR_TYPE_PALETTE) {
    if (expand_palette)
      png_set_palette_to_rgb(png);
    else if (depth < 8)
      png_set_packing(png);
  } else if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) {
    png_set_packing(png);
  }
  if (depth == 16) png_set_swap(png);  // host little-endian rows below
  png_read_update_info(png, info);

  out.width = png_get_image_width(png, info);
  out.height = png_get_image_height(png, info);
  out.channels = png_get_channels(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);

  buffer.resize(rowbytes * out.height);
  rows.resize(out.height);
  for (std::size_t r = 0; r < out.height; ++r) rows[r] = buffer.data() + r * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t n = out.width * out.height * out.channels;
  out.values.resize(n);
  for (std::size_t r = 0; r < out.height; ++r) {
    const png_byte* row = rows[r];
    const std::size_t m = out.width * out.channels;
    for (std::size_t i = 0; i < m; ++i) {
      out.values[r * m + i] =
          out.bit_depth == 16
              ? static_cast<std::uint16_t>(row[2 * i] | (row[2 * i + 1] << 8))
              : row[i];
    }
  }
  return out;
}

namespace detail {

inline void write_png_rows(const std::filesystem::path& path, std::size_t width,
                           std::size_t height, int color_type, int bit_depth,
                           const std::vector<png_byte>& buffer) {
  if (path.empty()) throw io_error("empty output path");
  file_ptr file(std::fopen(path.string().c_str(), "wb"));
  if (!file) throw io_error("cannot open " + path.string() + " for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            nullptr, png_warning_sink);
  if (!png) throw error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw error("png_create_info_struct failed");
  }
  const std::size_t channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  const std::size_t rowbytes = width * channels * (bit_depth / 8);
  std::vector<png_bytep> rows(height);
  for (std::size_t r = 0; r < height; ++r)
    rows[r] = const_cast<png_bytep>(buffer.data() + r * rowbytes);

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw io_error("cannot encode PNG " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width),
               static_cast<png_uint_32>(height), bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  // Fixed settings keep the encoded bytes reproducible.
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  if (bit_depth == 16) png_set_swap(png);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace detail

/// Binary mask: 0 is background, any nonzero sample is waste.
inline label_field read_png_mask(const std::filesystem::path& path) {
  const auto s = read_png_samples(path, false);
  label_field out(s.width, s.height);
  auto labels = out.data();
  // Gray+alpha masks carry the label in the first channel only.
  const std::size_t step = s.channels == 2 ? 2 : s.channels;
  const std::size_t used = s.channels == 2 ? 1 : s.channels;
  for (std::size_t i = 0; i < out.pixel_count(); ++i) {
    bool fg = false;
    for (std::size_t c = 0; c < used && c < 3; ++c) fg |= s.values[i * step + c] != 0;
    labels[i] = fg ? 1 : 0;
  }
  return out;
}

inline color_field read_png_color(const std::filesystem::path& path) {
  const auto s = read_png_samples(path, true);
  color_field out(s.width, s.height);
  auto rgb = out.data();
  const int shift = s.bit_depth == 16 ? 8 : 0;
  for (std::size_t i = 0; i < out.pixel_count(); ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      const std::size_t src = s.channels >= 3 ? c : 0;
      rgb[i * 3 + c] =
          static_cast<std::uint8_t>(s.values[i * s.channels + src] >> shift);
    }
  }
  return out;
}

/// Single-channel 16-bit PNG with depth in millimeters; 0 marks missing.
inline depth_field read_png_depth(const std::filesystem::path& path) {
  const auto s = read_png_samples(path, false);
  if (s.channels != 1 || s.palette)
    throw format_error(path.string() + ": depth PNG must be single-channel gray");
  std::vector<float> mm(s.values.begin(), s.values.end());
  return depth_field(s.width, s.height, std::move(mm));
}

/// Depth from either a 16-bit PNG or a portable array, chosen by extension.
inline depth_field read_depth(const std::filesystem::path& path) {
  if (path.extension() == ".png") return read_png_depth(path);
  return read_depth_array(path);
}

inline void write_png_mask(const label_field& labels,
                           const std::filesystem::path& path) {
  std::vector<png_byte> buf(labels.pixel_count());
  auto v = labels.data();
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = v[i] ? 255 : 0;
  detail::write_png_rows(path, labels.width(), labels.height(),
                         PNG_COLOR_TYPE_GRAY, 8, buf);
}

inline void write_png_color(const color_field& image,
                            const std::filesystem::path& path) {
  auto v = image.data();
  std::vector<png_byte> buf(v.begin(), v.end());
  detail::write_png_rows(path, image.width(), image.height(),
                         PNG_COLOR_TYPE_RGB, 8, buf);
}

/// Writes depth rounded to whole millimeters; missing pixels become 0.
inline void write_png_depth16(const depth_field& depth,
                              const std::filesystem::path& path) {
  std::vector<png_byte> buf(depth.pixel_count() * 2);
  auto v = depth.data();
  for (std::size_t i = 0; i < depth.pixel_count(); ++i) {
    const float clamped = std::min(v[i], 65535.0F);
    const auto mm = static_cast<std::uint16_t>(std::lround(clamped));
    buf[2 * i] = static_cast<png_byte>(mm & 0xFF);
    buf[2 * i + 1] = static_cast<png_byte>(mm >> 8);
  }
  detail::write_png_rows(path, depth.width(), depth.height(),
                         PNG_COLOR_TYPE_GRAY, 16, buf);
}

}  // namespace mlcrf

#endif  // MLCRF_PNG_IO_HPP_
