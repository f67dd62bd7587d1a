#include "boxfix/ap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "boxfix/error.hpp"
#include "boxfix/geometry.hpp"

namespace boxfix {

std::vector<double> coco_iou_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back(0.5 + 0.05 * i);
  return t;
}

std::vector<AreaRange> coco_area_ranges() {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return {{"small", 0.0, 32.0 * 32.0}, {"medium", 32.0 * 32.0, 96.0 * 96.0}, {"large", 96.0 * 96.0, inf}};
}

std::optional<double> APResult::at(double threshold) const {
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (thresholds[i] == threshold) return per_threshold[i];
  }
  return std::nullopt;
}

namespace {

constexpr int kRecallPoints = 101;

struct Detection {
  std::size_t pred_index;
  std::int64_t image_id;
  double score;
  const BBox* box;
};

struct GroundTruth {
  std::int64_t id;
  const BBox* box;
  bool ignore;
};

// One category, one IoU threshold, one area bracket. Returns nullopt when the
// bracket holds no ground truth for the category.
std::optional<double> category_ap(const std::vector<Detection>& dets,
                                  const std::map<std::int64_t, std::vector<GroundTruth>>& gts,
                                  double threshold, const AreaRange* range) {
  std::size_t npos = 0;
  std::map<std::int64_t, std::vector<GroundTruth>> local = gts;
  for (auto& [image, list] : local) {
    for (auto& g : list) {
      g.ignore = range != nullptr &&
                 (g.box->area() < range->min_area || g.box->area() >= range->max_area);
      if (!g.ignore) ++npos;
    }
  }
  if (npos == 0) return std::nullopt;

  std::map<std::int64_t, std::vector<bool>> matched;
  for (const auto& [image, list] : local) matched[image].assign(list.size(), false);

  std::vector<int> outcome;  // 1 TP, 0 FP; ignored detections are skipped
  outcome.reserve(dets.size());
  for (const Detection& d : dets) {
    const auto it = local.find(d.image_id);
    int best = -1;
    bool best_ignored = false;
    if (it != local.end()) {
      const auto& list = it->second;
      auto& used = matched[d.image_id];
      double best_iou = -1.0;
      // Non-ignored ground truth first; ignored entries only when nothing else matches.
      for (int pass = 0; pass < 2 && best < 0; ++pass) {
        for (std::size_t g = 0; g < list.size(); ++g) {
          if (used[g] || list[g].ignore != (pass == 1)) continue;
          const double v = iou(*d.box, *list[g].box);
          if (v < threshold) continue;
          if (v > best_iou || (v == best_iou && list[g].id < list[best].id)) {
            best_iou = v;
            best = static_cast<int>(g);
          }
        }
        best_ignored = pass == 1;
      }
      if (best >= 0) used[best] = true;
    }
    if (best >= 0) {
      if (!best_ignored) outcome.push_back(1);
      continue;
    }
    if (range != nullptr && (d.box->area() < range->min_area || d.box->area() >= range->max_area)) {
      continue;
    }
    outcome.push_back(0);
  }

  const std::size_t n = outcome.size();
  std::vector<double> recall(n), precision(n);
  double tp = 0.0, fp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    (outcome[i] ? tp : fp) += 1.0;
    recall[i] = tp / static_cast<double>(npos);
    precision[i] = tp / (tp + fp);
  }
  for (std::size_t i = n; i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);

  double sum = 0.0;
  std::size_t idx = 0;
  for (int k = 0; k < kRecallPoints; ++k) {
    const double r = static_cast<double>(k) / (kRecallPoints - 1);
    while (idx < n && recall[idx] < r - 1e-12) ++idx;
    if (idx < n) sum += precision[idx];
  }
  return sum / kRecallPoints;
}

void validate_thresholds(const std::vector<double>& t) {
  if (t.empty()) throw Error(ErrorCode::kInvalidArgument, "at least one IoU threshold is required");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] >= 0.0 && t[i] <= 1.0)) {
      throw Error(ErrorCode::kRange, "IoU thresholds must lie in [0, 1]");
    }
    if (i > 0 && !(t[i] > t[i - 1])) {
      throw Error(ErrorCode::kInvalidArgument, "IoU thresholds must be strictly increasing");
    }
  }
}

}  // namespace

APResult evaluate_ap(std::span<const Prediction> predictions,
                     std::span<const Instance> ground_truth, const APOptions& options) {
  validate_thresholds(options.thresholds);

  // category -> image -> ground truth, in id order for deterministic ties
  std::map<std::int64_t, std::map<std::int64_t, std::vector<GroundTruth>>> gts;
  std::set<std::int64_t> known(options.categories.begin(), options.categories.end());
  for (const Instance& g : ground_truth) {
    known.insert(g.category_id);
    if (g.iscrowd) continue;
    gts[g.category_id][g.image_id].push_back({g.id, &g.box, false});
  }
  for (auto& [cat, images] : gts) {
    for (auto& [image, list] : images) {
      std::stable_sort(list.begin(), list.end(),
                       [](const GroundTruth& a, const GroundTruth& b) { return a.id < b.id; });
    }
  }

  APResult result;
  result.thresholds = options.thresholds;

  std::map<std::int64_t, std::vector<Detection>> dets;
  std::set<std::int64_t> unknown;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    for (const CategoryScore& s : predictions[i].scores) {
      if (!known.contains(s.category_id)) {
        unknown.insert(s.category_id);
        continue;
      }
      dets[s.category_id].push_back({i, predictions[i].image_id, s.score, &predictions[i].box});
    }
  }
  if (!unknown.empty()) {
    std::ostringstream os;
    os << "ignored predictions for unknown category id(s):";
    for (auto c : unknown) os << ' ' << c;
    result.warnings.push_back(os.str());
  }
  for (auto& [cat, list] : dets) {
    std::stable_sort(list.begin(), list.end(),
                     [](const Detection& a, const Detection& b) { return a.score > b.score; });
  }

  static const std::vector<Detection> kNoDetections;
  auto run = [&](const AreaRange* range, std::vector<double>& per_threshold,
                 std::map<std::int64_t, double>* per_category) {
    std::map<std::int64_t, std::vector<double>> cat_values;
    for (double t : options.thresholds) {
      double sum = 0.0;
      int count = 0;
      for (const auto& [cat, images] : gts) {
        const auto it = dets.find(cat);
        const auto ap = category_ap(it == dets.end() ? kNoDetections : it->second, images, t, range);
        if (!ap) continue;
        sum += *ap;
        ++count;
        cat_values[cat].push_back(*ap);
      }
      per_threshold.push_back(count > 0 ? sum / count : -1.0);
    }
    if (per_category != nullptr) {
      for (const auto& [cat, values] : cat_values) {
        double s = 0.0;
        for (double v : values) s += v;
        (*per_category)[cat] = s / static_cast<double>(values.size());
      }
    }
  };

  run(nullptr, result.per_threshold, &result.per_category);
  if (!result.per_threshold.empty() && result.per_threshold.front() < 0.0) {
    result.warnings.push_back("no non-crowd ground truth; AP reported as 0");
    std::fill(result.per_threshold.begin(), result.per_threshold.end(), 0.0);
  }
  double total = 0.0;
  for (double v : result.per_threshold) total += v;
  result.map = total / static_cast<double>(result.per_threshold.size());

  if (options.size_breakdown) {
    for (const AreaRange& range : coco_area_ranges()) {
      std::vector<double> values;
      run(&range, values, nullptr);
      if (values.front() < 0.0) continue;
      double s = 0.0;
      for (double v : values) s += v;
      result.per_size[range.name] = s / static_cast<double>(values.size());
    }
  }
  return result;
}

}  // namespace boxfix
