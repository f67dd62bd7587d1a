#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "boxfix/annotation.hpp"
#include "boxfix/corrector.hpp"
#include "boxfix/metrics.hpp"
#include "boxfix/noise.hpp"
#include "boxfix/random.hpp"

namespace boxfix {

/// score = clip(IoU(prediction, clean) + N(0, noise_sd^2), 0, 1)
struct IoUProportionalScore {
  double noise_sd = 0.1;
};

struct ConstantScore {
  double score = 1.0;
};

using ScoreLaw = std::variant<IoUProportionalScore, ConstantScore>;

/// Stand-in for a frozen teacher detector.
struct SimConfig {
  std::size_t n_predictions = 20;
  NoiseModel pred_noise = GaussianSymmetric{0.05};
  ScoreLaw score_law = IoUProportionalScore{0.1};
  std::uint64_t seed = 0;

  void validate() const;
};

/// Draws cfg.n_predictions boxes around the clean box, each scored for the
/// clean instance's category.
std::vector<Prediction> simulate_predictions(const Instance& clean, const SimConfig& cfg, Rng& rng);

/// Procedural clean dataset: boxes with uniform extents and positions inside
/// a virtual image, `per_image` objects per image.
struct SceneConfig {
  std::size_t instances = 1000;
  std::size_t per_image = 4;
  double image_width = 640.0;
  double image_height = 480.0;
  double min_extent = 24.0;
  double max_extent = 200.0;
  std::size_t categories = 1;

  void validate() const;
};

/// Ids are 1..instances, image ids 1..ceil(instances / per_image).
std::vector<Instance> synthesize_instances(const SceneConfig& scene, std::uint64_t seed);

struct ExperimentRow {
  std::int64_t instance_id = 0;
  double iou_noisy = 0.0;
  double iou_corrected = 0.0;
  std::array<double, 4> rel_error_noisy{};
  std::array<double, 4> rel_error_corrected{};
  double delta_sum = 0.0;
  std::size_t kept = 0;
};

struct ExperimentReport {
  std::size_t instances = 0;
  double mean_iou_noisy = 0.0;
  double mean_iou_corrected = 0.0;
  /// Indexed by Boundary.
  std::array<BoundaryStats, 4> noisy_errors{};
  std::array<BoundaryStats, 4> corrected_errors{};
  double gamma_noisy = 0.0;
  double gamma_corrected = 0.0;
  std::size_t annotation_clamps = 0;
  std::size_t correction_clamps = 0;
  std::size_t unchanged = 0;
  std::size_t predictions = 0;
  std::vector<ExperimentRow> rows;
};

/// Artifacts of an experiment, for callers that want to write them out.
struct ExperimentData {
  std::vector<Instance> noisy;
  std::vector<Prediction> predictions;
  std::vector<Instance> corrected;
};

/// corrupt -> simulate teacher -> correct -> measure against the clean
/// boxes. Deterministic in (clean_instances, configs, seed). Annotation noise
/// is seeded from `seed`, the teacher from `sim.seed`.
ExperimentReport run_experiment(std::span<const Instance> clean_instances,
                                const NoiseModel& ann_noise, const SimConfig& sim,
                                const CorrectionConfig& cfg, std::uint64_t seed,
                                ExperimentData* data = nullptr);

}  // namespace boxfix
