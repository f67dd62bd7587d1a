#include "boxfix/annotation.hpp"

#include <algorithm>
#include <sstream>

#include "boxfix/error.hpp"

namespace boxfix {

namespace {

void check_scores(const std::vector<CategoryScore>& scores) {
  for (const auto& s : scores) {
    if (!(s.score >= 0.0 && s.score <= 1.0)) {
      std::ostringstream os;
      os << "score " << s.score << " for category " << s.category_id << " outside [0, 1]";
      throw Error(ErrorCode::kRange, os.str());
    }
  }
}

}  // namespace

Prediction::Prediction(std::int64_t image, BBox b, std::int64_t category, double score)
    : image_id(image), box(b), scores{{category, score}} {
  check_scores(scores);
}

Prediction::Prediction(std::int64_t image, BBox b, std::vector<CategoryScore> s)
    : image_id(image), box(b), scores(std::move(s)) {
  check_scores(scores);
}

std::optional<double> Prediction::score_for(std::int64_t category) const {
  for (const auto& s : scores) {
    if (s.category_id == category) return s.score;
  }
  return std::nullopt;
}

double Prediction::max_score() const {
  double best = 0.0;
  for (const auto& s : scores) best = std::max(best, s.score);
  return best;
}

}  // namespace boxfix
