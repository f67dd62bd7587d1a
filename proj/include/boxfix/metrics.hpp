#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "boxfix/annotation.hpp"
#include "boxfix/geometry.hpp"

namespace boxfix {

/// Error of one boundary of one instance, candidate minus reference.
struct ErrorSample {
  std::int64_t instance_id = 0;
  Boundary boundary = Boundary::kLeft;
  double relative_error = 0.0;  // absolute_error / object_extent
  double absolute_error = 0.0;  // pixels
  double object_extent = 0.0;   // reference width (left/right) or height (top/bottom)
};

/// Four samples per instance, in reference order. Instances are matched by
/// id; the two lists must hold the same id set. Reference boxes need positive
/// width and height.
std::vector<ErrorSample> error_samples(std::span<const Instance> reference,
                                       std::span<const Instance> candidate);

std::vector<double> relative_errors(std::span<const ErrorSample> samples);
std::vector<double> relative_errors(std::span<const ErrorSample> samples, Boundary boundary);

struct BoundaryStats {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
  double rms = 0.0;     // noise level gamma for this boundary
  std::size_t count = 0;
};

/// Per boundary statistics of the relative errors, indexed by Boundary.
std::array<BoundaryStats, 4> boundary_stats(std::span<const ErrorSample> samples);

struct CorrelationMatrix {
  /// Pearson coefficients indexed by Boundary; unit diagonal, symmetric.
  std::array<std::array<double, 4>, 4> r{};
  /// Boundaries whose error series has zero variance; their off-diagonal
  /// coefficients are reported as 0.
  std::array<bool, 4> zero_variance{};
  std::size_t instances = 0;
};

/// Correlation of per-instance relative errors between boundary pairs.
/// Needs at least two instances with all four boundaries present.
CorrelationMatrix correlation_matrix(std::span<const ErrorSample> samples);

struct ScaleScatter {
  /// (object_extent, absolute_error) per sample.
  std::vector<std::pair<double, double>> points;
  /// Least squares slope of |absolute_error| against extent, through the origin.
  double slope = 0.0;
};

ScaleScatter scale_scatter(std::span<const ErrorSample> samples);

/// Mean IoU between boxes of instances matched by id.
double mean_matched_iou(std::span<const Instance> reference, std::span<const Instance> candidate);

}  // namespace boxfix
