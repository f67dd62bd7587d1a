#pragma once

#include <cstdint>
#include <random>

namespace boxfix {

/// SplitMix64 finalizer; used to turn (seed, id, stream) tuples into
/// independent engine seeds.
std::uint64_t mix64(std::uint64_t x);

/// Seed for the per-item stream `stream` of item `id` under `master`.
/// A pure function, so results never depend on iteration order.
std::uint64_t derive_seed(std::uint64_t master, std::int64_t id, std::uint64_t stream = 0);

/// Seeded random source. The engine is std::mt19937_64; the variate
/// transforms are written out here so sequences are identical on every
/// standard library (std::*_distribution output is implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal (Marsaglia polar method).
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  /// Exponential with the given rate (mean 1/rate).
  double exponential(double rate);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace boxfix
