// Copyright 2026 The mlcrf Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef MLCRF_METRICS_HPP_
#define MLCRF_METRICS_HPP_

#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "mlcrf/raster.hpp"

namespace mlcrf {

/// Dataset-level pixel tallies per class.
struct confusion_counts {
  std::vector<std::uint64_t> tp, fp, fn;

  explicit confusion_counts(std::size_t classes = 2)
      : tp(classes, 0), fp(classes, 0), fn(classes, 0) {}

  std::size_t classes() const noexcept { return tp.size(); }

  confusion_counts& operator+=(const confusion_counts& o) {
    if (o.classes() != classes()) throw dimension_error("class count mismatch");
    for (std::size_t k = 0; k < classes(); ++k) {
      tp[k] += o.tp[k];
      fp[k] += o.fp[k];
      fn[k] += o.fn[k];
    }
    return *this;
  }

  friend bool operator==(const confusion_counts&, const confusion_counts&) = default;
};

inline confusion_counts accumulate(const label_field& pred, const label_field& truth,
                                   confusion_counts counts) {
  if (!pred.same_grid(truth.width(), truth.height()))
    throw dimension_error("prediction and truth differ in size");
  const std::size_t c = counts.classes();
  const auto p = pred.data();
  const auto t = truth.data();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] >= c || t[i] >= c) throw invalid_argument("label exceeds class count");
    if (p[i] == t[i]) {
      ++counts.tp[p[i]];
    } else {
      ++counts.fp[p[i]];
      ++counts.fn[t[i]];
    }
  }
  return counts;
}

// A class absent from both prediction and truth scores 1; a class that is
// predicted but never present scores 0 (its FP > 0 so the ratio is already 0).

inline double iou(const confusion_counts& m, std::size_t k) {
  const auto den = m.tp[k] + m.fp[k] + m.fn[k];
  return den == 0 ? 1.0 : static_cast<double>(m.tp[k]) / static_cast<double>(den);
}

inline double precision(const confusion_counts& m, std::size_t k) {
  const auto den = m.tp[k] + m.fp[k];
  if (den == 0) return m.fn[k] == 0 ? 1.0 : 0.0;
  return static_cast<double>(m.tp[k]) / static_cast<double>(den);
}

inline double mean_iou(const confusion_counts& m) {
  double s = 0.0;
  for (std::size_t k = 0; k < m.classes(); ++k) s += iou(m, k);
  return s / static_cast<double>(m.classes());
}

inline double mean_precision(const confusion_counts& m) {
  double s = 0.0;
  for (std::size_t k = 0; k < m.classes(); ++k) s += precision(m, k);
  return s / static_cast<double>(m.classes());
}

/// Summary row: IoU and Prec are reported for the waste class (index 1).
struct metrics_report {
  double iou = 0.0;
  double miou = 0.0;
  double prec = 0.0;
  double mean = 0.0;
  confusion_counts counts;
};

inline constexpr std::size_t waste_class = 1;

inline metrics_report summarize(const confusion_counts& m) {
  return {iou(m, waste_class), mean_iou(m), precision(m, waste_class), mean_precision(m), m};
}

inline std::string format_table(const metrics_report& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "IoU\tmIoU\tPrec\tMean\n";
  os << 100.0 * r.iou << '\t' << 100.0 * r.miou << '\t' << 100.0 * r.prec << '\t'
     << 100.0 * r.mean << '\n';
  return os.str();
}

inline nlohmann::json to_json(const metrics_report& r) {
  nlohmann::json per_class = nlohmann::json::array();
  for (std::size_t k = 0; k < r.counts.classes(); ++k)
    per_class.push_back({{"class", k},
                         {"tp", r.counts.tp[k]},
                         {"fp", r.counts.fp[k]},
                         {"fn", r.counts.fn[k]},
                         {"iou", iou(r.counts, k)},
                         {"precision", precision(r.counts, k)}});
  return {{"IoU", r.iou}, {"mIoU", r.miou}, {"Prec", r.prec}, {"Mean", r.mean},
          {"classes", per_class}};
}

}  // namespace mlcrf

#endif  // MLCRF_METRICS_HPP_
