#include "boxfix/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "boxfix/detail/overloaded.hpp"
#include "boxfix/error.hpp"

namespace boxfix {

using detail::overloaded;

namespace {

// Stream ids for derive_seed.
constexpr std::uint64_t kTeacherStream = 1;
constexpr std::uint64_t kSceneStream = 2;

}  // namespace

void SimConfig::validate() const {
  if (n_predictions < 1) throw Error(ErrorCode::kRange, "n_predictions must be >= 1");
  if (!(noise_gamma(pred_noise) >= 0.0)) {
    throw Error(ErrorCode::kRange, "teacher noise gamma must be >= 0");
  }
  std::visit(overloaded{
                 [](const IoUProportionalScore& s) {
                   if (!(s.noise_sd >= 0.0)) throw Error(ErrorCode::kRange, "score noise_sd must be >= 0");
                 },
                 [](const ConstantScore& s) {
                   if (!(s.score >= 0.0 && s.score <= 1.0)) {
                     throw Error(ErrorCode::kRange, "constant score must lie in [0, 1]");
                   }
                 },
             },
             score_law);
}

void SceneConfig::validate() const {
  if (instances < 1) throw Error(ErrorCode::kRange, "scene needs at least one instance");
  if (per_image < 1) throw Error(ErrorCode::kRange, "per_image must be >= 1");
  if (categories < 1) throw Error(ErrorCode::kRange, "categories must be >= 1");
  if (!(min_extent > 0.0) || !(max_extent >= min_extent)) {
    throw Error(ErrorCode::kRange, "need 0 < min_extent <= max_extent");
  }
  if (max_extent > image_width || max_extent > image_height) {
    throw Error(ErrorCode::kRange, "max_extent exceeds the virtual image");
  }
}

std::vector<Prediction> simulate_predictions(const Instance& clean, const SimConfig& cfg, Rng& rng) {
  std::vector<Prediction> out;
  out.reserve(cfg.n_predictions);
  for (std::size_t i = 0; i < cfg.n_predictions; ++i) {
    const BBox box = corrupt_box(clean.box, cfg.pred_noise, rng);
    const double score = std::visit(
        overloaded{
            [&](const IoUProportionalScore& s) {
              const double raw = iou(box, clean.box) + s.noise_sd * rng.normal();
              return std::clamp(raw, 0.0, 1.0);
            },
            [](const ConstantScore& s) { return s.score; },
        },
        cfg.score_law);
    out.emplace_back(clean.image_id, box, clean.category_id, score);
  }
  return out;
}

std::vector<Instance> synthesize_instances(const SceneConfig& scene, std::uint64_t seed) {
  scene.validate();
  std::vector<Instance> out;
  out.reserve(scene.instances);
  for (std::size_t i = 0; i < scene.instances; ++i) {
    const auto id = static_cast<std::int64_t>(i + 1);
    Rng rng(derive_seed(seed, id, kSceneStream));
    const double w = rng.uniform(scene.min_extent, scene.max_extent);
    const double h = rng.uniform(scene.min_extent, scene.max_extent);
    const double x = rng.uniform(0.0, scene.image_width - w);
    const double y = rng.uniform(0.0, scene.image_height - h);
    Instance inst;
    inst.id = id;
    inst.image_id = static_cast<std::int64_t>(i / scene.per_image + 1);
    inst.category_id = static_cast<std::int64_t>(rng.next_u64() % scene.categories + 1);
    inst.box = from_xywh(x, y, w, h);
    out.push_back(inst);
  }
  return out;
}

ExperimentReport run_experiment(std::span<const Instance> clean_instances,
                                const NoiseModel& ann_noise, const SimConfig& sim,
                                const CorrectionConfig& cfg, std::uint64_t seed,
                                ExperimentData* data) {
  if (clean_instances.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "run_experiment needs at least one instance");
  }
  sim.validate();
  cfg.validate();

  CorruptionSummary noise_summary;
  std::vector<Instance> noisy = corrupt_dataset(clean_instances, ann_noise, seed, &noise_summary);

  std::vector<Prediction> predictions;
  predictions.reserve(clean_instances.size() * sim.n_predictions);
  for (const Instance& clean : clean_instances) {
    Rng rng(derive_seed(sim.seed, clean.id, kTeacherStream));
    try {
      auto preds = simulate_predictions(clean, sim, rng);
      predictions.insert(predictions.end(), preds.begin(), preds.end());
    } catch (const Error& e) {
      std::ostringstream os;
      os << "instance " << clean.id << ": " << e.what();
      throw Error(e.code(), os.str());
    }
  }

  CorrectionReport correction;
  std::vector<Instance> corrected = correct_dataset(noisy, predictions, cfg, &correction);

  const auto noisy_samples = error_samples(clean_instances, noisy);
  const auto corrected_samples = error_samples(clean_instances, corrected);

  ExperimentReport report;
  report.instances = clean_instances.size();
  report.noisy_errors = boundary_stats(noisy_samples);
  report.corrected_errors = boundary_stats(corrected_samples);
  report.gamma_noisy = estimate_noise_level(relative_errors(noisy_samples));
  report.gamma_corrected = estimate_noise_level(relative_errors(corrected_samples));
  report.annotation_clamps = noise_summary.clamped;
  report.correction_clamps = correction.clamped;
  report.unchanged = correction.unchanged;
  report.predictions = predictions.size();

  double sum_noisy = 0.0, sum_corrected = 0.0;
  report.rows.reserve(clean_instances.size());
  for (std::size_t i = 0; i < clean_instances.size(); ++i) {
    ExperimentRow row;
    row.instance_id = clean_instances[i].id;
    row.iou_noisy = iou(clean_instances[i].box, noisy[i].box);
    row.iou_corrected = iou(clean_instances[i].box, corrected[i].box);
    for (int b = 0; b < 4; ++b) {
      row.rel_error_noisy[b] = noisy_samples[4 * i + b].relative_error;
      row.rel_error_corrected[b] = corrected_samples[4 * i + b].relative_error;
    }
    row.delta_sum = correction.instances[i].delta_sum;
    row.kept = correction.instances[i].kept;
    sum_noisy += row.iou_noisy;
    sum_corrected += row.iou_corrected;
    report.rows.push_back(row);
  }
  const double n = static_cast<double>(clean_instances.size());
  report.mean_iou_noisy = sum_noisy / n;
  report.mean_iou_corrected = sum_corrected / n;

  if (data != nullptr) {
    data->noisy = std::move(noisy);
    data->predictions = std::move(predictions);
    data->corrected = std::move(corrected);
  }
  return report;
}

}  // namespace boxfix
