#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "boxfix/geometry.hpp"

namespace boxfix {

/// One annotated object.
struct Instance {
  std::int64_t id = 0;
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;
  BBox box;
  bool iscrowd = false;

  friend bool operator==(const Instance&, const Instance&) = default;
};

struct CategoryScore {
  std::int64_t category_id = 0;
  double score = 0.0;

  friend bool operator==(const CategoryScore&, const CategoryScore&) = default;
};

/// One decoded detector output. Scores are kept per category; results files
/// carry a single (category, score) pair per entry.
struct Prediction {
  std::int64_t image_id = 0;
  BBox box;
  std::vector<CategoryScore> scores;

  Prediction() = default;
  Prediction(std::int64_t image, BBox b, std::int64_t category, double score);
  Prediction(std::int64_t image, BBox b, std::vector<CategoryScore> s);

  /// Score for `category`, or nullopt when the prediction carries none.
  std::optional<double> score_for(std::int64_t category) const;
  /// Highest score over all categories (0 when empty).
  double max_score() const;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

}  // namespace boxfix
