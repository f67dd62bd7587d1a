#include "boxfix/report.hpp"

#include <sstream>

#include "boxfix/detail/overloaded.hpp"
#include "boxfix/error.hpp"

namespace boxfix::report {

using detail::overloaded;

namespace {

template <class T>
T field_or(const json& j, const char* key, T fallback) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kSchema, std::string("config field '") + key + "' has the wrong type");
  }
}

void require_object(const json& j, const char* what) {
  if (!j.is_object()) throw Error(ErrorCode::kSchema, std::string(what) + " must be a JSON object");
}

json stats_entry(const BoundaryStats& s) {
  return {{"mean", s.mean}, {"stddev", s.stddev}, {"rms", s.rms}, {"count", s.count}};
}

}  // namespace

json header(const std::string& command, const json& config) {
  return {{"schema_version", kSchemaVersion}, {"tool", "boxfix"}, {"command", command}, {"config", config}};
}

json to_json(const NoiseModel& model) {
  return {{"model", noise_model_name(model)}, {"gamma", noise_gamma(model)}};
}

NoiseModel noise_model_from_json(const json& j) {
  require_object(j, "noise model");
  return make_noise_model(field_or<std::string>(j, "model", "gaussian"),
                          field_or<double>(j, "gamma", 0.0));
}

json to_json(const CorrectionConfig& cfg) {
  return {{"weight", format_weight_fn(cfg.weight)},
          {"iou_floor", cfg.iou_floor},
          {"score_floor", cfg.score_floor},
          {"top_k", cfg.top_k},
          {"use_score", cfg.use_score}};
}

CorrectionConfig correction_config_from_json(const json& j, CorrectionConfig base) {
  require_object(j, "correction config");
  if (j.contains("weight")) base.weight = parse_weight_fn(field_or<std::string>(j, "weight", ""));
  base.iou_floor = field_or<double>(j, "iou_floor", base.iou_floor);
  base.score_floor = field_or<double>(j, "score_floor", base.score_floor);
  const auto top_k = field_or<std::int64_t>(j, "top_k", static_cast<std::int64_t>(base.top_k));
  if (top_k < 1) throw Error(ErrorCode::kRange, "top_k must be >= 1");
  base.top_k = static_cast<std::size_t>(top_k);
  base.use_score = field_or<bool>(j, "use_score", base.use_score);
  base.validate();
  return base;
}

json to_json(const SimConfig& cfg) {
  json law = std::visit(overloaded{
                            [](const IoUProportionalScore& s) -> json {
                              return {{"type", "iou_proportional"}, {"noise_sd", s.noise_sd}};
                            },
                            [](const ConstantScore& s) -> json {
                              return {{"type", "constant"}, {"score", s.score}};
                            },
                        },
                        cfg.score_law);
  return {{"n_predictions", cfg.n_predictions},
          {"noise", to_json(cfg.pred_noise)},
          {"score_law", std::move(law)},
          {"seed", cfg.seed}};
}

SimConfig sim_config_from_json(const json& j, SimConfig base) {
  require_object(j, "teacher config");
  const auto n = field_or<std::int64_t>(j, "n_predictions", static_cast<std::int64_t>(base.n_predictions));
  if (n < 1) throw Error(ErrorCode::kRange, "n_predictions must be >= 1");
  base.n_predictions = static_cast<std::size_t>(n);
  if (j.contains("noise")) base.pred_noise = noise_model_from_json(j["noise"]);
  if (j.contains("score_law")) {
    const json& law = j["score_law"];
    require_object(law, "score_law");
    const auto type = field_or<std::string>(law, "type", "iou_proportional");
    if (type == "iou_proportional") {
      base.score_law = IoUProportionalScore{field_or<double>(law, "noise_sd", 0.1)};
    } else if (type == "constant") {
      base.score_law = ConstantScore{field_or<double>(law, "score", 1.0)};
    } else {
      throw Error(ErrorCode::kSchema, "unknown score_law type '" + type + "'");
    }
  }
  base.seed = field_or<std::uint64_t>(j, "seed", base.seed);
  base.validate();
  return base;
}

json to_json(const SceneConfig& cfg) {
  return {{"instances", cfg.instances},   {"per_image", cfg.per_image},
          {"image_width", cfg.image_width}, {"image_height", cfg.image_height},
          {"min_extent", cfg.min_extent}, {"max_extent", cfg.max_extent},
          {"categories", cfg.categories}};
}

SceneConfig scene_config_from_json(const json& j, SceneConfig base) {
  require_object(j, "scene config");
  auto count = [&](const char* key, std::size_t fallback) {
    const auto v = field_or<std::int64_t>(j, key, static_cast<std::int64_t>(fallback));
    if (v < 1) throw Error(ErrorCode::kRange, std::string(key) + " must be >= 1");
    return static_cast<std::size_t>(v);
  };
  base.instances = count("instances", base.instances);
  base.per_image = count("per_image", base.per_image);
  base.categories = count("categories", base.categories);
  base.image_width = field_or<double>(j, "image_width", base.image_width);
  base.image_height = field_or<double>(j, "image_height", base.image_height);
  base.min_extent = field_or<double>(j, "min_extent", base.min_extent);
  base.max_extent = field_or<double>(j, "max_extent", base.max_extent);
  base.validate();
  return base;
}

json to_json(const CorruptionSummary& s) {
  return {{"instances", s.instances}, {"clamped", s.clamped}, {"empirical_gamma", s.empirical_gamma}};
}

json to_json(const CorrectionReport& r, bool per_instance) {
  json out = {{"instances", r.instances.size()},
              {"unchanged", r.unchanged},
              {"unchanged_fraction", r.unchanged_fraction()},
              {"clamped", r.clamped},
              {"predictions_total", r.predictions_total},
              {"predictions_unmatched", r.predictions_unmatched},
              {"warnings", r.warnings}};
  if (per_instance) {
    json rows = json::array();
    for (const auto& row : r.instances) {
      rows.push_back({{"id", row.instance_id},
                      {"delta_sum", row.delta_sum},
                      {"kept", row.kept},
                      {"changed", row.changed}});
    }
    out["per_instance"] = std::move(rows);
  }
  return out;
}

json to_json(const std::array<BoundaryStats, 4>& stats) {
  json out = json::object();
  for (Boundary b : kAllBoundaries) out[boundary_name(b)] = stats_entry(stats[static_cast<int>(b)]);
  return out;
}

json to_json(const CorrelationMatrix& m) {
  json order = json::array();
  json zero = json::array();
  json rows = json::array();
  for (Boundary b : kAllBoundaries) {
    const int i = static_cast<int>(b);
    order.push_back(boundary_name(b));
    if (m.zero_variance[i]) zero.push_back(boundary_name(b));
    rows.push_back(json(m.r[i]));
  }
  return {{"order", order}, {"matrix", rows}, {"zero_variance", zero}, {"instances", m.instances}};
}

json to_json(const ExperimentReport& r) {
  return {{"instances", r.instances},
          {"mean_iou_noisy", r.mean_iou_noisy},
          {"mean_iou_corrected", r.mean_iou_corrected},
          {"mean_iou_gain", r.mean_iou_corrected - r.mean_iou_noisy},
          {"gamma_noisy", r.gamma_noisy},
          {"gamma_corrected", r.gamma_corrected},
          {"noisy_errors", to_json(r.noisy_errors)},
          {"corrected_errors", to_json(r.corrected_errors)},
          {"annotation_clamps", r.annotation_clamps},
          {"correction_clamps", r.correction_clamps},
          {"unchanged", r.unchanged},
          {"predictions", r.predictions}};
}

json to_json(const APResult& r) {
  json per_threshold = json::array();
  for (std::size_t i = 0; i < r.thresholds.size(); ++i) {
    per_threshold.push_back({{"iou", r.thresholds[i]}, {"ap", r.per_threshold[i]}});
  }
  json per_category = json::array();
  for (const auto& [cat, ap] : r.per_category) per_category.push_back({{"category_id", cat}, {"ap", ap}});
  json out = {{"map", r.map},
              {"per_threshold", per_threshold},
              {"per_category", per_category},
              {"warnings", r.warnings}};
  if (!r.per_size.empty()) out["per_size"] = r.per_size;
  return out;
}

json analysis(std::span<const Instance> reference, std::span<const Instance> candidate) {
  const auto samples = error_samples(reference, candidate);
  json out = {{"instances", reference.size()}, {"mean_iou", mean_matched_iou(reference, candidate)}};
  if (samples.empty()) return out;
  const auto stats = boundary_stats(samples);
  json level = {{"overall", estimate_noise_level(relative_errors(samples))}};
  for (Boundary b : kAllBoundaries) level[boundary_name(b)] = stats[static_cast<int>(b)].rms;
  out["noise_level"] = std::move(level);
  out["boundary_stats"] = to_json(stats);
  if (reference.size() >= 2) out["correlation"] = to_json(correlation_matrix(samples));
  const ScaleScatter scatter = scale_scatter(samples);
  out["scale_scatter"] = {{"slope", scatter.slope}, {"points", scatter.points.size()}};
  return out;
}

std::string experiment_rows_csv(const ExperimentReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "instance_id,iou_noisy,iou_corrected,delta_sum,kept";
  for (Boundary b : kAllBoundaries) os << ",noisy_" << boundary_name(b);
  for (Boundary b : kAllBoundaries) os << ",corrected_" << boundary_name(b);
  os << '\n';
  for (const auto& row : r.rows) {
    os << row.instance_id << ',' << row.iou_noisy << ',' << row.iou_corrected << ','
       << row.delta_sum << ',' << row.kept;
    for (double e : row.rel_error_noisy) os << ',' << e;
    for (double e : row.rel_error_corrected) os << ',' << e;
    os << '\n';
  }
  return os.str();
}

std::string error_samples_csv(std::span<const ErrorSample> samples) {
  std::ostringstream os;
  os.precision(17);
  os << "instance_id,boundary,relative_error,absolute_error,object_extent\n";
  for (const auto& s : samples) {
    os << s.instance_id << ',' << boundary_name(s.boundary) << ',' << s.relative_error << ','
       << s.absolute_error << ',' << s.object_extent << '\n';
  }
  return os.str();
}

}  // namespace boxfix::report
