#include "boxfix/noise.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "boxfix/detail/overloaded.hpp"
#include "boxfix/error.hpp"

namespace boxfix {

namespace {

using detail::overloaded;

// Per boundary sign that moves the boundary outward: l and t decrease,
// r and b increase.
constexpr std::array<double, 4> kOutward = {-1.0, -1.0, 1.0, 1.0};

}  // namespace

double noise_gamma(const NoiseModel& model) {
  return std::visit([](const auto& m) { return m.gamma; }, model);
}

std::string noise_model_name(const NoiseModel& model) {
  return std::visit(overloaded{
                        [](const GaussianSymmetric&) { return std::string("gaussian"); },
                        [](const ExponentialEnclosing&) { return std::string("exp-enclosing"); },
                        [](const ExponentialEnclosed&) { return std::string("exp-enclosed"); },
                    },
                    model);
}

NoiseModel make_noise_model(const std::string& name, double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw Error(ErrorCode::kRange, "noise level gamma must be a finite value >= 0");
  }
  if (name == "gaussian") return GaussianSymmetric{gamma};
  if (name == "exp-enclosing") return ExponentialEnclosing{gamma};
  if (name == "exp-enclosed") return ExponentialEnclosed{gamma};
  throw Error(ErrorCode::kInvalidArgument,
              "unknown noise model '" + name + "' (expected gaussian|exp-enclosing|exp-enclosed)");
}

double exponential_rate_for_gamma(double gamma) { return std::sqrt(2.0) / gamma; }

CorruptedBox corrupt_box_detailed(const BBox& clean, const NoiseModel& model, Rng& rng) {
  if (!(clean.width() > 0.0) || !(clean.height() > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "cannot corrupt a box with zero width or height (relative noise undefined)");
  }
  const double gamma = noise_gamma(model);
  if (!(gamma >= 0.0)) throw Error(ErrorCode::kRange, "noise level gamma must be >= 0");
  if (gamma == 0.0) return {clean, false};

  auto coords = clean.coords();
  for (Boundary b : kAllBoundaries) {
    const int i = static_cast<int>(b);
    const double extent = clean.extent_for(b);
    const double relative = std::visit(
        overloaded{
            [&](const GaussianSymmetric& m) { return m.gamma * rng.normal(); },
            [&](const ExponentialEnclosing& m) {
              return kOutward[i] * rng.exponential(exponential_rate_for_gamma(m.gamma));
            },
            [&](const ExponentialEnclosed& m) {
              return -kOutward[i] * rng.exponential(exponential_rate_for_gamma(m.gamma));
            },
        },
        model);
    coords[i] += relative * extent;
  }
  if (std::holds_alternative<ExponentialEnclosed>(model)) {
    // An inward boundary stops at the opposite clean edge, so a repaired
    // pair stays within half a pixel of the clean box.
    const auto clean_coords = clean.coords();
    for (int i = 0; i < 2; ++i) {
      coords[i] = std::min(coords[i], clean_coords[i + 2]);
      coords[i + 2] = std::max(coords[i + 2], clean_coords[i]);
    }
  }
  CorruptedBox out;
  out.box = BBox::sanitized(coords, &out.clamped);
  return out;
}

std::vector<Instance> corrupt_dataset(std::span<const Instance> instances,
                                      const NoiseModel& model, std::uint64_t master_seed,
                                      CorruptionSummary* summary) {
  std::vector<Instance> out;
  out.reserve(instances.size());
  std::size_t clamped = 0;
  double sum_sq = 0.0;
  for (const Instance& inst : instances) {
    Rng rng(derive_seed(master_seed, inst.id));
    CorruptedBox noisy;
    try {
      noisy = corrupt_box_detailed(inst.box, model, rng);
    } catch (const Error& e) {
      std::ostringstream os;
      os << "instance " << inst.id << ": " << e.what();
      throw Error(e.code(), os.str());
    }
    if (noisy.clamped) ++clamped;
    for (Boundary b : kAllBoundaries) {
      const double rel = (noisy.box.coord(b) - inst.box.coord(b)) / inst.box.extent_for(b);
      sum_sq += rel * rel;
    }
    Instance copy = inst;
    copy.box = noisy.box;
    out.push_back(copy);
  }
  if (summary != nullptr) {
    summary->instances = instances.size();
    summary->clamped = clamped;
    summary->empirical_gamma =
        instances.empty() ? 0.0 : std::sqrt(sum_sq / (4.0 * static_cast<double>(instances.size())));
  }
  return out;
}

double estimate_noise_level(std::span<const double> relative_errors) {
  if (relative_errors.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "estimate_noise_level needs at least one error");
  }
  double sum_sq = 0.0;
  for (double e : relative_errors) sum_sq += e * e;
  return std::sqrt(sum_sq / static_cast<double>(relative_errors.size()));
}

}  // namespace boxfix
