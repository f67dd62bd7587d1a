#pragma once

#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "boxfix/ap.hpp"
#include "boxfix/corrector.hpp"
#include "boxfix/metrics.hpp"
#include "boxfix/noise.hpp"
#include "boxfix/simulator.hpp"

namespace boxfix::report {

using json = nlohmann::json;

/// Bumped whenever a report layout changes incompatibly.
inline constexpr int kSchemaVersion = 1;

/// {"schema_version", "tool", "command", "config"} header shared by all reports.
json header(const std::string& command, const json& config);

json to_json(const NoiseModel& model);
NoiseModel noise_model_from_json(const json& j);
json to_json(const CorrectionConfig& cfg);
/// Fills fields present in `j` over `base`.
CorrectionConfig correction_config_from_json(const json& j, CorrectionConfig base = {});
json to_json(const SimConfig& cfg);
SimConfig sim_config_from_json(const json& j, SimConfig base = {});
json to_json(const SceneConfig& cfg);
SceneConfig scene_config_from_json(const json& j, SceneConfig base = {});

json to_json(const CorruptionSummary& s);
json to_json(const CorrectionReport& r, bool per_instance = true);
json to_json(const std::array<BoundaryStats, 4>& stats);
json to_json(const CorrelationMatrix& m);
json to_json(const ExperimentReport& r);
json to_json(const APResult& r);

/// Noise analytics of `candidate` against `reference`.
json analysis(std::span<const Instance> reference, std::span<const Instance> candidate);

std::string experiment_rows_csv(const ExperimentReport& r);
std::string error_samples_csv(std::span<const ErrorSample> samples);

}  // namespace boxfix::report
