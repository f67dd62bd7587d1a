#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "boxfix/annotation.hpp"
#include "boxfix/geometry.hpp"

namespace boxfix {

/// f(t) = 1 if t >= tau else 0.
struct StepWeight {
  double tau = 0.7;
};

/// f(t) = exp(-(1 - t)^2 / alpha).
struct GaussianWeight {
  double alpha = 0.1;
};

/// f(t) = 1: no IoU gating, the weight is the category score alone.
struct UnitWeight {};

using WeightFn = std::variant<StepWeight, GaussianWeight, UnitWeight>;

/// f(iou) for the given weight function.
double weight_fn_value(const WeightFn& fn, double iou_value);

/// "step:0.7", "gauss:0.1" or "none".
WeightFn parse_weight_fn(const std::string& text);
std::string format_weight_fn(const WeightFn& fn);

struct CorrectionConfig {
  WeightFn weight = StepWeight{0.7};
  /// Pre-filter: predictions with IoU below this against the annotation are dropped.
  double iou_floor = 0.5;
  /// Pre-filter: predictions scoring below this for the annotation's category are dropped.
  double score_floor = 0.05;
  std::size_t top_k = 1000;
  /// When false the category score is left out of the weight (delta = f(IoU)).
  bool use_score = true;

  /// Throws Error(kRange) on out-of-range fields.
  void validate() const;
};

/// delta = f(IoU(prediction, annotation)) * p[annotation category].
/// A prediction without a score for that category gets weight 0.
double weight(const Prediction& prediction, const Instance& annotation, const WeightFn& fn);
double weight(const Prediction& prediction, const Instance& annotation,
              const CorrectionConfig& cfg);

/// Positions (into `predictions`) of the predictions that pass the IoU and
/// score floors, capped at top_k by score. Returned in descending score
/// order, ties by ascending position.
std::vector<std::size_t> select_predictions(std::span<const Prediction> predictions,
                                            const Instance& annotation,
                                            const CorrectionConfig& cfg);

std::vector<Prediction> filter_predictions(std::span<const Prediction> predictions,
                                           const Instance& annotation,
                                           const CorrectionConfig& cfg);

struct BoxCorrection {
  BBox box;
  double delta_sum = 0.0;
  std::size_t kept = 0;
  bool clamped = false;
};

/// Per boundary: x = (x* + sum delta_i x_i) / (1 + sum delta_i), over the
/// predictions that survive filtering. With sum delta_i == 0 the annotation
/// box comes back unchanged.
BoxCorrection correct_box_detailed(const Instance& annotation,
                                   std::span<const Prediction> predictions,
                                   const CorrectionConfig& cfg);
inline BBox correct_box(const Instance& annotation, std::span<const Prediction> predictions,
                        const CorrectionConfig& cfg) {
  return correct_box_detailed(annotation, predictions, cfg).box;
}

/// The weighted average above applied to already-weighted predictions.
/// Exposed for tests of the scalar update.
BBox weighted_correction(const BBox& annotation, std::span<const BBox> boxes,
                         std::span<const double> deltas, bool* clamped = nullptr);

struct InstanceCorrection {
  std::int64_t instance_id = 0;
  double delta_sum = 0.0;
  std::size_t kept = 0;
  bool changed = false;
  bool clamped = false;
};

struct CorrectionReport {
  std::vector<InstanceCorrection> instances;
  std::size_t unchanged = 0;
  std::size_t clamped = 0;
  std::size_t predictions_total = 0;
  /// Predictions whose image_id matches no annotation.
  std::size_t predictions_unmatched = 0;
  std::vector<std::string> warnings;

  double unchanged_fraction() const {
    return instances.empty() ? 1.0
                             : static_cast<double>(unchanged) /
                                   static_cast<double>(instances.size());
  }
};

/// Corrects every annotation from the predictions on its own image. Output
/// order matches input order; ids, categories and crowd flags are untouched.
std::vector<Instance> correct_dataset(std::span<const Instance> annotations,
                                      std::span<const Prediction> predictions,
                                      const CorrectionConfig& cfg,
                                      CorrectionReport* report = nullptr);

}  // namespace boxfix
