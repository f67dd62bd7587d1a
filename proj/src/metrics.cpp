#include "boxfix/metrics.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>

#include "boxfix/error.hpp"

namespace boxfix {

namespace {

std::unordered_map<std::int64_t, const Instance*> index_by_id(std::span<const Instance> list,
                                                              const char* which) {
  std::unordered_map<std::int64_t, const Instance*> idx;
  idx.reserve(list.size());
  for (const Instance& inst : list) {
    if (!idx.emplace(inst.id, &inst).second) {
      std::ostringstream os;
      os << which << " list repeats instance id " << inst.id;
      throw Error(ErrorCode::kInvalidArgument, os.str());
    }
  }
  return idx;
}

// Pairs reference entries with candidate entries by id.
std::vector<std::pair<const Instance*, const Instance*>> match_by_id(
    std::span<const Instance> reference, std::span<const Instance> candidate) {
  if (reference.size() != candidate.size()) {
    std::ostringstream os;
    os << "instance count mismatch: reference " << reference.size() << ", candidate "
       << candidate.size();
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
  const auto cand = index_by_id(candidate, "candidate");
  index_by_id(reference, "reference");
  std::vector<std::pair<const Instance*, const Instance*>> out;
  out.reserve(reference.size());
  for (const Instance& ref : reference) {
    const auto it = cand.find(ref.id);
    if (it == cand.end()) {
      std::ostringstream os;
      os << "instance id " << ref.id << " missing from candidate list";
      throw Error(ErrorCode::kInvalidArgument, os.str());
    }
    out.emplace_back(&ref, it->second);
  }
  return out;
}

}  // namespace

std::vector<ErrorSample> error_samples(std::span<const Instance> reference,
                                       std::span<const Instance> candidate) {
  std::vector<ErrorSample> out;
  out.reserve(4 * reference.size());
  for (const auto& [ref, cand] : match_by_id(reference, candidate)) {
    if (!(ref->box.width() > 0.0) || !(ref->box.height() > 0.0)) {
      std::ostringstream os;
      os << "reference instance " << ref->id << " has zero width or height";
      throw Error(ErrorCode::kInvalidArgument, os.str());
    }
    for (Boundary b : kAllBoundaries) {
      ErrorSample s;
      s.instance_id = ref->id;
      s.boundary = b;
      s.object_extent = ref->box.extent_for(b);
      s.absolute_error = cand->box.coord(b) - ref->box.coord(b);
      s.relative_error = s.absolute_error / s.object_extent;
      out.push_back(s);
    }
  }
  return out;
}

std::vector<double> relative_errors(std::span<const ErrorSample> samples) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.relative_error);
  return out;
}

std::vector<double> relative_errors(std::span<const ErrorSample> samples, Boundary boundary) {
  std::vector<double> out;
  for (const auto& s : samples) {
    if (s.boundary == boundary) out.push_back(s.relative_error);
  }
  return out;
}

std::array<BoundaryStats, 4> boundary_stats(std::span<const ErrorSample> samples) {
  std::array<BoundaryStats, 4> stats{};
  std::array<double, 4> sum{}, sum_sq{};
  for (const auto& s : samples) {
    const int i = static_cast<int>(s.boundary);
    sum[i] += s.relative_error;
    sum_sq[i] += s.relative_error * s.relative_error;
    ++stats[i].count;
  }
  for (int i = 0; i < 4; ++i) {
    if (stats[i].count == 0) continue;
    const double n = static_cast<double>(stats[i].count);
    stats[i].mean = sum[i] / n;
    stats[i].rms = std::sqrt(sum_sq[i] / n);
    // Two-pass for the spread to avoid cancellation.
    double ss = 0.0;
    for (const auto& s : samples) {
      if (static_cast<int>(s.boundary) != i) continue;
      const double d = s.relative_error - stats[i].mean;
      ss += d * d;
    }
    stats[i].stddev = std::sqrt(ss / n);
  }
  return stats;
}

CorrelationMatrix correlation_matrix(std::span<const ErrorSample> samples) {
  // instance id -> relative errors by boundary; ordered map keeps the
  // reduction order deterministic.
  std::map<std::int64_t, std::array<double, 4>> rows;
  std::map<std::int64_t, int> seen_mask;
  for (const auto& s : samples) {
    const int i = static_cast<int>(s.boundary);
    rows[s.instance_id][i] = s.relative_error;
    seen_mask[s.instance_id] |= 1 << i;
  }
  std::vector<std::array<double, 4>> complete;
  for (const auto& [id, row] : rows) {
    if (seen_mask[id] == 0xF) complete.push_back(row);
  }
  if (complete.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "correlation needs at least two instances with all four boundaries");
  }

  const double n = static_cast<double>(complete.size());
  std::array<double, 4> mean{};
  for (const auto& row : complete) {
    for (int i = 0; i < 4; ++i) mean[i] += row[i];
  }
  for (double& m : mean) m /= n;

  std::array<std::array<double, 4>, 4> cov{};
  for (const auto& row : complete) {
    for (int i = 0; i < 4; ++i) {
      for (int j = i; j < 4; ++j) cov[i][j] += (row[i] - mean[i]) * (row[j] - mean[j]);
    }
  }

  CorrelationMatrix out;
  out.instances = complete.size();
  for (int i = 0; i < 4; ++i) out.zero_variance[i] = !(cov[i][i] > 0.0);
  for (int i = 0; i < 4; ++i) {
    out.r[i][i] = 1.0;
    for (int j = i + 1; j < 4; ++j) {
      double r = 0.0;
      if (!out.zero_variance[i] && !out.zero_variance[j]) {
        r = std::clamp(cov[i][j] / std::sqrt(cov[i][i] * cov[j][j]), -1.0, 1.0);
      }
      out.r[i][j] = r;
      out.r[j][i] = r;
    }
  }
  return out;
}

ScaleScatter scale_scatter(std::span<const ErrorSample> samples) {
  ScaleScatter out;
  out.points.reserve(samples.size());
  double sxy = 0.0, sxx = 0.0;
  for (const auto& s : samples) {
    out.points.emplace_back(s.object_extent, s.absolute_error);
    sxy += s.object_extent * std::abs(s.absolute_error);
    sxx += s.object_extent * s.object_extent;
  }
  out.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  return out;
}

double mean_matched_iou(std::span<const Instance> reference, std::span<const Instance> candidate) {
  const auto pairs = match_by_id(reference, candidate);
  if (pairs.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [ref, cand] : pairs) sum += iou(ref->box, cand->box);
  return sum / static_cast<double>(pairs.size());
}

}  // namespace boxfix
