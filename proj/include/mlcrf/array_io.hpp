// Copyright 2026 The mlcrf Authors
// SPDX-License-Identifier: Apache-2.0

// Portable array container:
//
//   offset  size  field
//   0       4     magic "MLF1"
//   4       4     dtype (u32 LE): 1 = float32, 2 = uint16, 3 = uint8
//   8       4     height (u32 LE)
//   12      4     width (u32 LE)
//   16      4     channels (u32 LE)
//   20      ...   row-major, pixel-interleaved little-endian payload

#ifndef MLCRF_ARRAY_IO_HPP_
#define MLCRF_ARRAY_IO_HPP_

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mlcrf/raster.hpp"

namespace mlcrf {

enum class dtype : std::uint32_t { float32 = 1, uint16 = 2, uint8 = 3 };

inline std::size_t dtype_size(dtype t) {
  switch (t) {
    case dtype::float32: return 4;
    case dtype::uint16: return 2;
    case dtype::uint8: return 1;
  }
  throw format_error("unknown dtype code");
}

inline constexpr std::array<char, 4> array_magic{'M', 'L', 'F', '1'};
inline constexpr std::size_t array_header_size = 20;

/// Decoded header plus the untouched little-endian payload bytes.
struct portable_array {
  dtype type = dtype::float32;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t channels = 0;
  std::vector<std::uint8_t> payload;

  std::size_t element_count() const {
    return std::size_t{height} * width * channels;
  }

  friend bool operator==(const portable_array&,
                         const portable_array&) = default;
};

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) |
         (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
}

template <typename T>
T load_le(const std::uint8_t* p) {
  std::array<std::uint8_t, sizeof(T)> b{};
  std::memcpy(b.data(), p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(b.begin(), b.end());
  T v;
  std::memcpy(&v, b.data(), sizeof(T));
  return v;
}

template <typename T>
void store_le(std::vector<std::uint8_t>& out, T v) {
  std::array<std::uint8_t, sizeof(T)> b{};
  std::memcpy(b.data(), &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(b.begin(), b.end());
  out.insert(out.end(), b.begin(), b.end());
}

inline std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > std::numeric_limits<std::uint32_t>::max())
    throw dimension_error(std::string(what) + " exceeds u32 range");
  return static_cast<std::uint32_t>(v);
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_array(const portable_array& a) {
  if (a.payload.size() != a.element_count() * dtype_size(a.type))
    throw dimension_error("payload size does not match header dimensions");
  std::vector<std::uint8_t> out(array_magic.begin(), array_magic.end());
  detail::put_u32(out, static_cast<std::uint32_t>(a.type));
  detail::put_u32(out, a.height);
  detail::put_u32(out, a.width);
  detail::put_u32(out, a.channels);
  out.insert(out.end(), a.payload.begin(), a.payload.end());
  return out;
}

inline portable_array decode_array(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < array_header_size)
    throw format_error("array file shorter than its header");
  if (std::memcmp(bytes.data(), array_magic.data(), 4) != 0)
    throw format_error("bad magic, expected MLF1");
  portable_array a;
  const auto code = detail::get_u32(bytes.data() + 4);
  if (code < 1 || code > 3)
    throw format_error("unknown dtype code " + std::to_string(code));
  a.type = static_cast<dtype>(code);
  a.height = detail::get_u32(bytes.data() + 8);
  a.width = detail::get_u32(bytes.data() + 12);
  a.channels = detail::get_u32(bytes.data() + 16);
  if (a.height == 0 || a.width == 0 || a.channels == 0)
    throw format_error("array dimensions must be non-zero");
  const std::size_t expected = a.element_count() * dtype_size(a.type);
  const std::size_t actual = bytes.size() - array_header_size;
  if (actual != expected)
    throw dimension_error("header declares " + std::to_string(a.height) + "x" +
                          std::to_string(a.width) + "x" +
                          std::to_string(a.channels) + " (" +
                          std::to_string(expected) + " payload bytes) but file has " +
                          std::to_string(actual));
  a.payload.assign(bytes.begin() + array_header_size, bytes.end());
  return a;
}

inline portable_array read_array(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open array file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_array(bytes);
}

inline void write_array(const portable_array& a,
                        const std::filesystem::path& path) {
  if (path.empty()) throw io_error("empty output path");
  const auto bytes = encode_array(a);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw io_error("write failed for " + path.string());
}

// Typed views -------------------------------------------------------------

inline std::vector<float> array_as_floats(const portable_array& a) {
  std::vector<float> v(a.element_count());
  const auto* p = a.payload.data();
  switch (a.type) {
    case dtype::float32:
      for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = detail::load_le<float>(p + 4 * i);
      break;
    case dtype::uint16:
      for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = detail::load_le<std::uint16_t>(p + 2 * i);
      break;
    case dtype::uint8:
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = p[i];
      break;
  }
  return v;
}

inline portable_array float_array(std::size_t width, std::size_t height,
                                  std::size_t channels,
                                  std::span<const float> values) {
  portable_array a;
  a.type = dtype::float32;
  a.height = detail::checked_u32(height, "height");
  a.width = detail::checked_u32(width, "width");
  a.channels = detail::checked_u32(channels, "channels");
  a.payload.reserve(values.size() * 4);
  for (float f : values) detail::store_le(a.payload, f);
  return a;
}

inline logit_field to_logits(const portable_array& a) {
  if (a.type != dtype::float32)
    throw format_error("logit arrays must be float32");
  const auto v = array_as_floats(a);
  return logit_field(a.width, a.height, a.channels, {v.begin(), v.end()});
}

inline probability_field to_probabilities(const portable_array& a) {
  if (a.type != dtype::float32)
    throw format_error("probability arrays must be float32");
  return probability_field(a.width, a.height, a.channels, array_as_floats(a));
}

inline depth_field to_depth(const portable_array& a) {
  if (a.channels != 1) throw format_error("depth arrays must have 1 channel");
  if (a.type == dtype::uint8) throw format_error("depth arrays must be float32 or uint16");
  return depth_field(a.width, a.height, array_as_floats(a));
}

// Logits are stored as float32; values are rounded to nearest.
inline portable_array to_array(const logit_field& f) {
  const std::vector<float> v(f.data().begin(), f.data().end());
  return float_array(f.width(), f.height(), f.channels(), v);
}
inline portable_array to_array(const probability_field& f) {
  return float_array(f.width(), f.height(), f.channels(), f.data());
}
inline portable_array to_array(const depth_field& f) {
  return float_array(f.width(), f.height(), 1, f.data());
}

inline logit_field read_logits(const std::filesystem::path& path) {
  return to_logits(read_array(path));
}
inline probability_field read_probabilities(const std::filesystem::path& path) {
  return to_probabilities(read_array(path));
}
inline depth_field read_depth_array(const std::filesystem::path& path) {
  return to_depth(read_array(path));
}

template <typename Field>
void write_field(const Field& f, const std::filesystem::path& path) {
  write_array(to_array(f), path);
}

}  // namespace mlcrf

#endif  // MLCRF_ARRAY_IO_HPP_
