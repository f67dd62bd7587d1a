#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "boxfix/annotation.hpp"

namespace boxfix {

/// 0.50, 0.55, ..., 0.95
std::vector<double> coco_iou_thresholds();

struct AreaRange {
  std::string name;
  double min_area = 0.0;
  double max_area = 0.0;  // exclusive
};

/// COCO brackets: small < 32^2 <= medium < 96^2 <= large.
std::vector<AreaRange> coco_area_ranges();

struct APOptions {
  std::vector<double> thresholds = coco_iou_thresholds();
  /// Extra category ids considered known even without ground truth.
  std::vector<std::int64_t> categories;
  /// Also compute mAP per COCO area bracket.
  bool size_breakdown = false;
};

struct APResult {
  std::vector<double> thresholds;
  /// Category-averaged AP at each threshold, same order as `thresholds`.
  std::vector<double> per_threshold;
  double map = 0.0;
  /// Category id -> AP averaged over thresholds. Only categories with
  /// non-crowd ground truth appear.
  std::map<std::int64_t, double> per_category;
  /// Area bracket name -> mAP, filled when size_breakdown is set. Brackets
  /// without ground truth are omitted.
  std::map<std::string, double> per_size;
  std::vector<std::string> warnings;

  /// AP at `threshold` (exact match on the configured list).
  std::optional<double> at(double threshold) const;
};

/// COCO-style average precision: score-descending greedy matching per image
/// and category, 101-point interpolated precision, averaged over categories
/// and then thresholds. Crowd ground truth takes no part in matching or in
/// the recall denominator.
APResult evaluate_ap(std::span<const Prediction> predictions,
                     std::span<const Instance> ground_truth, const APOptions& options = {});

}  // namespace boxfix
