#include "boxfix/corrector.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "boxfix/detail/overloaded.hpp"
#include "boxfix/error.hpp"

namespace boxfix {

using detail::overloaded;

double weight_fn_value(const WeightFn& fn, double t) {
  return std::visit(overloaded{
                        [&](const StepWeight& s) { return t >= s.tau ? 1.0 : 0.0; },
                        [&](const GaussianWeight& g) {
                          const double d = 1.0 - t;
                          return std::exp(-d * d / g.alpha);
                        },
                        [](const UnitWeight&) { return 1.0; },
                    },
                    fn);
}

namespace {

double parse_number(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw Error(ErrorCode::kInvalidArgument, "cannot parse " + what + " from '" + text + "'");
  }
  return v;
}

void check_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    std::ostringstream os;
    os << name << " = " << v << " outside [0, 1]";
    throw Error(ErrorCode::kRange, os.str());
  }
}

}  // namespace

WeightFn parse_weight_fn(const std::string& text) {
  if (text == "none") return UnitWeight{};
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument,
                "weight must be step:<tau>, gauss:<alpha> or none, got '" + text + "'");
  }
  const std::string kind = text.substr(0, colon);
  const double value = parse_number(text.substr(colon + 1), "weight parameter");
  if (kind == "step") {
    check_unit(value, "step tau");
    return StepWeight{value};
  }
  if (kind == "gauss") {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw Error(ErrorCode::kRange, "gauss alpha must be a positive finite number");
    }
    return GaussianWeight{value};
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown weight function '" + kind + "'");
}

std::string format_weight_fn(const WeightFn& fn) {
  return std::visit(overloaded{
                        [](const StepWeight& s) {
                          std::ostringstream os;
                          os << "step:" << s.tau;
                          return os.str();
                        },
                        [](const GaussianWeight& g) {
                          std::ostringstream os;
                          os << "gauss:" << g.alpha;
                          return os.str();
                        },
                        [](const UnitWeight&) { return std::string("none"); },
                    },
                    fn);
}

void CorrectionConfig::validate() const {
  std::visit(overloaded{
                 [](const StepWeight& s) { check_unit(s.tau, "step tau"); },
                 [](const GaussianWeight& g) {
                   if (!(g.alpha > 0.0)) throw Error(ErrorCode::kRange, "gauss alpha must be > 0");
                 },
                 [](const UnitWeight&) {},
             },
             weight);
  check_unit(iou_floor, "iou_floor");
  check_unit(score_floor, "score_floor");
  if (top_k < 1) throw Error(ErrorCode::kRange, "top_k must be >= 1");
}

double weight(const Prediction& prediction, const Instance& annotation, const WeightFn& fn) {
  const auto score = prediction.score_for(annotation.category_id);
  if (!score) return 0.0;
  return weight_fn_value(fn, iou(prediction.box, annotation.box)) * *score;
}

double weight(const Prediction& prediction, const Instance& annotation,
              const CorrectionConfig& cfg) {
  if (cfg.use_score) return weight(prediction, annotation, cfg.weight);
  if (!prediction.score_for(annotation.category_id)) return 0.0;
  return weight_fn_value(cfg.weight, iou(prediction.box, annotation.box));
}

std::vector<std::size_t> select_predictions(std::span<const Prediction> predictions,
                                            const Instance& annotation,
                                            const CorrectionConfig& cfg) {
  struct Candidate {
    std::size_t index;
    double score;
  };
  std::vector<Candidate> kept;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto score = predictions[i].score_for(annotation.category_id);
    if (!score || *score < cfg.score_floor) continue;
    if (iou(predictions[i].box, annotation.box) < cfg.iou_floor) continue;
    kept.push_back({i, *score});
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
  if (kept.size() > cfg.top_k) kept.resize(cfg.top_k);

  std::vector<std::size_t> out;
  out.reserve(kept.size());
  for (const auto& c : kept) out.push_back(c.index);
  return out;
}

std::vector<Prediction> filter_predictions(std::span<const Prediction> predictions,
                                           const Instance& annotation,
                                           const CorrectionConfig& cfg) {
  std::vector<Prediction> out;
  for (std::size_t i : select_predictions(predictions, annotation, cfg)) {
    out.push_back(predictions[i]);
  }
  return out;
}

BBox weighted_correction(const BBox& annotation, std::span<const BBox> boxes,
                         std::span<const double> deltas, bool* clamped) {
  if (boxes.size() != deltas.size()) {
    throw Error(ErrorCode::kInvalidArgument, "boxes and weights differ in length");
  }
  double delta_sum = 0.0;
  std::array<double, 4> acc = annotation.coords();
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    if (deltas[i] == 0.0) continue;
    const auto c = boxes[i].coords();
    for (int k = 0; k < 4; ++k) acc[k] += deltas[i] * c[k];
    delta_sum += deltas[i];
  }
  if (clamped != nullptr) *clamped = false;
  if (delta_sum == 0.0) return annotation;
  for (double& v : acc) v /= 1.0 + delta_sum;
  return BBox::sanitized(acc, clamped);
}

BoxCorrection correct_box_detailed(const Instance& annotation,
                                   std::span<const Prediction> predictions,
                                   const CorrectionConfig& cfg) {
  const auto selected = select_predictions(predictions, annotation, cfg);
  std::vector<BBox> boxes;
  std::vector<double> deltas;
  boxes.reserve(selected.size());
  deltas.reserve(selected.size());
  for (std::size_t i : selected) {
    boxes.push_back(predictions[i].box);
    deltas.push_back(weight(predictions[i], annotation, cfg));
  }
  BoxCorrection out;
  out.kept = selected.size();
  out.delta_sum = std::accumulate(deltas.begin(), deltas.end(), 0.0);
  out.box = weighted_correction(annotation.box, boxes, deltas, &out.clamped);
  return out;
}

namespace {

// Canonical order within an image so correction does not depend on the order
// of the predictions file.
bool canonical_less(const Prediction& a, const Prediction& b) {
  const auto ca = a.box.coords();
  const auto cb = b.box.coords();
  if (ca != cb) return ca < cb;
  return std::lexicographical_compare(
      a.scores.begin(), a.scores.end(), b.scores.begin(), b.scores.end(),
      [](const CategoryScore& x, const CategoryScore& y) {
        if (x.category_id != y.category_id) return x.category_id < y.category_id;
        return x.score < y.score;
      });
}

}  // namespace

std::vector<Instance> correct_dataset(std::span<const Instance> annotations,
                                      std::span<const Prediction> predictions,
                                      const CorrectionConfig& cfg, CorrectionReport* report) {
  cfg.validate();

  std::set<std::int64_t> known_images;
  for (const Instance& a : annotations) known_images.insert(a.image_id);

  std::map<std::int64_t, std::vector<Prediction>> by_image;
  std::size_t unmatched = 0;
  std::set<std::int64_t> unknown_images;
  for (const Prediction& p : predictions) {
    if (!known_images.contains(p.image_id)) {
      ++unmatched;
      unknown_images.insert(p.image_id);
      continue;
    }
    by_image[p.image_id].push_back(p);
  }
  for (auto& [image, preds] : by_image) {
    std::stable_sort(preds.begin(), preds.end(), canonical_less);
  }

  std::vector<Instance> out;
  out.reserve(annotations.size());
  CorrectionReport local;
  for (const Instance& a : annotations) {
    const auto it = by_image.find(a.image_id);
    const std::span<const Prediction> image_preds =
        it == by_image.end() ? std::span<const Prediction>() : std::span<const Prediction>(it->second);
    const BoxCorrection c = correct_box_detailed(a, image_preds, cfg);

    Instance corrected = a;
    corrected.box = c.box;
    out.push_back(corrected);

    InstanceCorrection row;
    row.instance_id = a.id;
    row.delta_sum = c.delta_sum;
    row.kept = c.kept;
    row.changed = !(c.box == a.box);
    row.clamped = c.clamped;
    if (!row.changed) ++local.unchanged;
    if (row.clamped) ++local.clamped;
    local.instances.push_back(row);
  }

  if (report != nullptr) {
    local.predictions_total = predictions.size();
    local.predictions_unmatched = unmatched;
    if (unmatched > 0) {
      std::ostringstream os;
      os << unmatched << " prediction(s) reference image ids without annotations:";
      int shown = 0;
      for (auto id : unknown_images) {
        if (shown++ == 8) {
          os << " ...";
          break;
        }
        os << ' ' << id;
      }
      local.warnings.push_back(os.str());
    }
    *report = std::move(local);
  }
  return out;
}

}  // namespace boxfix
