#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "boxfix/annotation.hpp"
#include "boxfix/geometry.hpp"
#include "boxfix/random.hpp"

namespace boxfix {

/// Zero-mean Gaussian noise on every boundary, sd = gamma * w (left/right)
/// or gamma * h (top/bottom).
struct GaussianSymmetric {
  double gamma = 0.0;
};

/// Each boundary moves outward by an exponential draw with rate
/// lambda = sqrt(2) / gamma, in units of the object width/height.
struct ExponentialEnclosing {
  double gamma = 0.0;
};

/// As ExponentialEnclosing, but every boundary moves inward.
struct ExponentialEnclosed {
  double gamma = 0.0;
};

using NoiseModel = std::variant<GaussianSymmetric, ExponentialEnclosing, ExponentialEnclosed>;

double noise_gamma(const NoiseModel& model);
/// "gaussian", "exp-enclosing" or "exp-enclosed".
std::string noise_model_name(const NoiseModel& model);
/// Inverse of noise_model_name; throws on unknown names or negative gamma.
NoiseModel make_noise_model(const std::string& name, double gamma);

/// Exponential rate giving a root mean squared relative error of `gamma`.
double exponential_rate_for_gamma(double gamma);

struct CorruptedBox {
  BBox box;
  bool clamped = false;
};

/// Perturbs the four boundaries of `clean` independently.
/// Throws when the clean box has zero width or height.
CorruptedBox corrupt_box_detailed(const BBox& clean, const NoiseModel& model, Rng& rng);
inline BBox corrupt_box(const BBox& clean, const NoiseModel& model, Rng& rng) {
  return corrupt_box_detailed(clean, model, rng).box;
}

struct CorruptionSummary {
  std::size_t instances = 0;
  std::size_t clamped = 0;
  /// Root mean squared relative boundary error over all four boundaries.
  double empirical_gamma = 0.0;
};

/// Corrupts every instance with a stream seeded from (master_seed, id), so
/// the output for an id does not depend on list order.
std::vector<Instance> corrupt_dataset(std::span<const Instance> instances,
                                      const NoiseModel& model, std::uint64_t master_seed,
                                      CorruptionSummary* summary = nullptr);

/// sqrt(mean(e^2)). Throws on an empty list.
double estimate_noise_level(std::span<const double> relative_errors);

}  // namespace boxfix
