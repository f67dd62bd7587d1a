#include <doctest.h>

#include <cmath>
#include <vector>

#include "boxfix/error.hpp"
#include "boxfix/metrics.hpp"
#include "boxfix/noise.hpp"
#include "boxfix/random.hpp"

using namespace boxfix;

namespace {

Instance make(std::int64_t id, const BBox& box) {
  Instance i;
  i.id = id;
  i.image_id = 1;
  i.category_id = 1;
  i.box = box;
  return i;
}

std::vector<Instance> random_clean(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Instance> out;
  for (int i = 0; i < n; ++i) {
    const double x = rng.uniform(0, 400), y = rng.uniform(0, 400);
    out.push_back(make(i + 1, BBox(x, y, x + rng.uniform(20, 300), y + rng.uniform(20, 300))));
  }
  return out;
}

}  // namespace

TEST_CASE("error samples") {
  const std::vector<Instance> ref{make(1, BBox(0, 0, 100, 100))};
  for (const auto& s : error_samples(ref, ref)) CHECK(s.relative_error == 0.0);

  const std::vector<Instance> cand{make(1, BBox(5, 0, 100, 100))};
  const auto samples = error_samples(ref, cand);
  REQUIRE(samples.size() == 4);
  CHECK(samples[0].boundary == Boundary::kLeft);
  CHECK(samples[0].relative_error == doctest::Approx(0.05));
  CHECK(samples[0].absolute_error == 5.0);
  CHECK(samples[0].object_extent == 100.0);
  for (int i = 1; i < 4; ++i) CHECK(samples[i].relative_error == 0.0);
}

TEST_CASE("error samples reject mismatched ids") {
  const std::vector<Instance> ref{make(1, BBox(0, 0, 10, 10))};
  const std::vector<Instance> other{make(2, BBox(0, 0, 10, 10))};
  CHECK_THROWS_AS(error_samples(ref, other), Error);
  CHECK_THROWS_AS(error_samples(ref, std::vector<Instance>{}), Error);
  const std::vector<Instance> flat{make(1, BBox(0, 0, 0, 10))};
  CHECK_THROWS_AS(error_samples(flat, flat), Error);
}

TEST_CASE("error samples match instances by id, not position") {
  const std::vector<Instance> ref{make(1, BBox(0, 0, 10, 10)), make(2, BBox(0, 0, 20, 20))};
  const std::vector<Instance> cand{make(2, BBox(2, 0, 20, 20)), make(1, BBox(0, 0, 10, 10))};
  const auto s = error_samples(ref, cand);
  CHECK(s[0].relative_error == 0.0);
  CHECK(s[4].instance_id == 2);
  CHECK(s[4].relative_error == doctest::Approx(0.1));
}

TEST_CASE("noise level of a corrupted dataset closes the loop") {
  const auto clean = random_clean(30000, 4);
  const auto noisy = corrupt_dataset(clean, GaussianSymmetric{0.1}, 12);
  const double g = estimate_noise_level(relative_errors(error_samples(clean, noisy)));
  CHECK(g == doctest::Approx(0.1).epsilon(0.01));
}

TEST_CASE("correlation matrix") {
  std::vector<ErrorSample> samples;
  Rng rng(6);
  for (int i = 0; i < 50; ++i) {
    const double v = rng.normal();
    const double u = rng.normal();
    samples.push_back({i, Boundary::kLeft, v, v, 1});
    samples.push_back({i, Boundary::kRight, -v, -v, 1});
    samples.push_back({i, Boundary::kTop, v, v, 1});
    samples.push_back({i, Boundary::kBottom, u, u, 1});
  }
  const auto m = correlation_matrix(samples);
  const int L = 0, T = 1, R = 2;
  CHECK(m.r[L][T] == doctest::Approx(1.0));
  CHECK(m.r[L][R] == doctest::Approx(-1.0));
  for (int i = 0; i < 4; ++i) {
    CHECK(m.r[i][i] == 1.0);
    for (int j = 0; j < 4; ++j) {
      CHECK(m.r[i][j] == m.r[j][i]);
      CHECK(std::abs(m.r[i][j]) <= 1.0);
    }
  }
}

TEST_CASE("zero-variance series are flagged") {
  std::vector<ErrorSample> samples;
  for (int i = 0; i < 10; ++i) {
    samples.push_back({i, Boundary::kLeft, 0.0, 0, 1});
    samples.push_back({i, Boundary::kRight, 0.1 * i, 0, 1});
    samples.push_back({i, Boundary::kTop, -0.1 * i, 0, 1});
    samples.push_back({i, Boundary::kBottom, 0.0, 0, 1});
  }
  const auto m = correlation_matrix(samples);
  CHECK(m.zero_variance[0]);
  CHECK(m.zero_variance[3]);
  CHECK_FALSE(m.zero_variance[2]);
  CHECK(m.r[0][2] == 0.0);
  CHECK(m.r[0][0] == 1.0);
  CHECK(m.r[1][2] == doctest::Approx(-1.0));

  const std::vector<ErrorSample> one{{1, Boundary::kLeft, 0, 0, 1}};
  CHECK_THROWS_AS(correlation_matrix(one), Error);
}

TEST_CASE("independent gaussian boundaries are uncorrelated") {
  const auto clean = random_clean(100000, 8);
  const auto noisy = corrupt_dataset(clean, GaussianSymmetric{0.1}, 3);
  const auto m = correlation_matrix(error_samples(clean, noisy));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) CHECK(std::abs(m.r[i][j]) < 0.02);
}

TEST_CASE("scale scatter slope") {
  std::vector<ErrorSample> zero{{1, Boundary::kLeft, 0, 0, 50}, {1, Boundary::kTop, 0, 0, 80}};
  CHECK(scale_scatter(zero).slope == 0.0);

  std::vector<ErrorSample> exact;
  for (double e : {10.0, 35.0, 200.0}) exact.push_back({1, Boundary::kLeft, 0.1, 0.1 * e, e});
  const auto s = scale_scatter(exact);
  CHECK(s.slope == doctest::Approx(0.1));
  CHECK(s.points.size() == 3);

  // |N(0, sigma)| has mean sigma * sqrt(2 / pi)
  const auto clean = random_clean(50000, 13);
  const auto noisy = corrupt_dataset(clean, GaussianSymmetric{0.1}, 17);
  const double slope = scale_scatter(error_samples(clean, noisy)).slope;
  CHECK(slope == doctest::Approx(0.1 * std::sqrt(2.0 / M_PI)).epsilon(0.02));
}

TEST_CASE("boundary statistics") {
  std::vector<ErrorSample> samples{{1, Boundary::kLeft, 0.1, 0, 1}, {2, Boundary::kLeft, -0.3, 0, 1}};
  const auto stats = boundary_stats(samples);
  CHECK(stats[0].count == 2);
  CHECK(stats[0].mean == doctest::Approx(-0.1));
  CHECK(stats[0].stddev == doctest::Approx(0.2));
  CHECK(stats[0].rms == doctest::Approx(std::sqrt(0.05)));
  CHECK(stats[1].count == 0);
}
