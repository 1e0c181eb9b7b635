// Copyright 2026 The mlcrf Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef MLCRF_MANIFEST_HPP_
#define MLCRF_MANIFEST_HPP_

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "mlcrf/proposer.hpp"
#include "mlcrf/raster.hpp"

namespace mlcrf {

struct manifest_region {
  std::size_t region_id = 0;
  box bounds;
  /// Region logit file, relative to the dataset root unless absolute.
  std::string logits;

  friend bool operator==(const manifest_region&, const manifest_region&) = default;
};

struct region_manifest {
  std::string image_id;
  std::size_t width = 0;
  std::size_t height = 0;
  std::string proposal_hash;
  std::vector<manifest_region> regions;

  friend bool operator==(const region_manifest&, const region_manifest&) = default;
};

/// FNV-1a (64-bit) over the image size and the ordered proposal rectangles.
inline std::string proposal_hash(std::size_t width, std::size_t height,
                                 const std::vector<region_proposal>& proposals) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  };
  mix(width);
  mix(height);
  mix(proposals.size());
  for (const auto& p : proposals) {
    mix(p.bounds.top);
    mix(p.bounds.left);
    mix(p.bounds.height);
    mix(p.bounds.width);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string default_region_logits_path(const std::string& image_id, std::size_t region) {
  return "regions/" + image_id + "_r" + std::to_string(region) + ".mlf";
}

inline region_manifest make_manifest(const std::string& image_id, std::size_t width,
                                     std::size_t height,
                                     const std::vector<region_proposal>& proposals) {
  region_manifest m{image_id, width, height, proposal_hash(width, height, proposals), {}};
  for (std::size_t k = 0; k < proposals.size(); ++k)
    m.regions.push_back({k, proposals[k].bounds, default_region_logits_path(image_id, k)});
  return m;
}

inline nlohmann::json to_json(const region_manifest& m) {
  nlohmann::json regions = nlohmann::json::array();
  for (const auto& r : m.regions)
    regions.push_back({{"region_id", r.region_id},
                       {"top", r.bounds.top},
                       {"left", r.bounds.left},
                       {"height", r.bounds.height},
                       {"width", r.bounds.width},
                       {"logits", r.logits}});
  return {{"image_id", m.image_id},
          {"width", m.width},
          {"height", m.height},
          {"proposal_hash", m.proposal_hash},
          {"regions", regions}};
}

inline region_manifest manifest_from_json(const nlohmann::json& j) {
  try {
    region_manifest m;
    m.image_id = j.at("image_id").get<std::string>();
    m.width = j.at("width").get<std::size_t>();
    m.height = j.at("height").get<std::size_t>();
    m.proposal_hash = j.at("proposal_hash").get<std::string>();
    for (const auto& r : j.at("regions")) {
      manifest_region mr;
      mr.region_id = r.at("region_id").get<std::size_t>();
      mr.bounds = {r.at("top").get<std::size_t>(), r.at("left").get<std::size_t>(),
                   r.at("height").get<std::size_t>(), r.at("width").get<std::size_t>()};
      mr.logits = r.contains("logits") ? r.at("logits").get<std::string>()
                                       : default_region_logits_path(m.image_id, mr.region_id);
      m.regions.push_back(std::move(mr));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw format_error(std::string("malformed manifest: ") + e.what());
  }
}

inline void write_manifest(const region_manifest& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  out << to_json(m).dump(2) << '\n';
  if (!out) throw io_error("write failed for " + path.string());
}

inline region_manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open manifest " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw format_error(path.string() + ": " + e.what());
  }
  return manifest_from_json(j);
}

}  // namespace mlcrf

#endif  // MLCRF_MANIFEST_HPP_
