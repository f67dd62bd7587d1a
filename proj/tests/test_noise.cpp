#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "boxfix/error.hpp"
#include "boxfix/noise.hpp"

using namespace boxfix;

namespace {

// Relative errors of one boundary over `n` corruptions of `clean`.
std::vector<double> boundary_errors(const BBox& clean, const NoiseModel& model, Boundary b, int n,
                                    std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const BBox noisy = corrupt_box(clean, model, rng);
    out.push_back((noisy.coord(b) - clean.coord(b)) / clean.extent_for(b));
  }
  return out;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

std::vector<Instance> grid_instances(int n) {
  std::vector<Instance> out;
  for (int i = 0; i < n; ++i) {
    Instance inst;
    inst.id = 100 + 7 * i;
    inst.image_id = 1 + i / 3;
    inst.category_id = 1;
    inst.box = from_xywh(10.0 * i, 5.0 * i, 20.0 + i, 30.0 + 2 * i);
    out.push_back(inst);
  }
  return out;
}

}  // namespace

TEST_CASE("zero noise leaves boxes untouched") {
  Rng rng(1);
  const BBox b(3, 4, 50, 70);
  CHECK(corrupt_box(b, GaussianSymmetric{0.0}, rng) == b);
  CHECK(corrupt_box(b, ExponentialEnclosing{0.0}, rng) == b);
  CHECK(corrupt_box(b, ExponentialEnclosed{0.0}, rng) == b);
}

TEST_CASE("zero-extent clean boxes are rejected") {
  Rng rng(1);
  CHECK_THROWS_AS(corrupt_box(BBox(0, 0, 0, 10), GaussianSymmetric{0.1}, rng), Error);
  CHECK_THROWS_AS(corrupt_box(BBox(0, 0, 10, 0), GaussianSymmetric{0.1}, rng), Error);
}

TEST_CASE("noise model names") {
  CHECK(noise_model_name(make_noise_model("gaussian", 0.1)) == "gaussian");
  CHECK(noise_model_name(make_noise_model("exp-enclosing", 0.1)) == "exp-enclosing");
  CHECK(noise_model_name(make_noise_model("exp-enclosed", 0.1)) == "exp-enclosed");
  CHECK_THROWS_AS(make_noise_model("uniform", 0.1), Error);
  CHECK_THROWS_AS(make_noise_model("gaussian", -0.1), Error);
  CHECK(exponential_rate_for_gamma(0.05) == doctest::Approx(20.0 * std::sqrt(2.0)));
}

TEST_CASE("estimate_noise_level") {
  CHECK(estimate_noise_level(std::vector<double>{0, 0, 0}) == 0.0);
  CHECK(estimate_noise_level(std::vector<double>{0.1, -0.1, 0.1, -0.1}) == doctest::Approx(0.1));
  CHECK_THROWS_AS(estimate_noise_level(std::vector<double>{}), Error);
}

TEST_CASE("gaussian calibration: left boundary of a 100x100 box") {
  const auto errs =
      boundary_errors(BBox(0, 0, 100, 100), GaussianSymmetric{0.1}, Boundary::kLeft, 100000, 7);
  const double g = estimate_noise_level(errs);
  CHECK(g >= 0.098);
  CHECK(g <= 0.102);
}

TEST_CASE("calibration within 2% for every model and level") {
  const BBox clean(10, 20, 90, 220);  // w 80, h 200
  std::uint64_t seed = 100;
  for (double gamma : {0.05, 0.1}) {
    for (const NoiseModel& m :
         {NoiseModel{GaussianSymmetric{gamma}}, NoiseModel{ExponentialEnclosing{gamma}},
          NoiseModel{ExponentialEnclosed{gamma}}}) {
      for (Boundary b : kAllBoundaries) {
        const double g = estimate_noise_level(boundary_errors(clean, m, b, 100000, ++seed));
        INFO(noise_model_name(m), " gamma=", gamma, " boundary=", boundary_name(b));
        CHECK(std::abs(g - gamma) / gamma < 0.02);
      }
    }
  }
}

TEST_CASE("exponential level identity at lambda = 20 sqrt 2") {
  Rng rng(2024);
  const double rate = 20.0 * std::sqrt(2.0);
  std::vector<double> draws(1000000);
  for (double& d : draws) d = rng.exponential(rate);
  CHECK(std::abs(estimate_noise_level(draws) - 0.05) <= 0.001);
}

TEST_CASE("enclosing noise contains the clean box, enclosed noise is contained") {
  const BBox clean(37, 12, 137, 62);
  Rng rng(5);
  for (int i = 0; i < 10000; ++i) {
    REQUIRE(corrupt_box(clean, ExponentialEnclosing{0.05}, rng).contains(clean));
  }
  for (int i = 0; i < 10000; ++i) {
    const auto c = corrupt_box_detailed(clean, ExponentialEnclosed{0.05}, rng);
    REQUIRE(clean.contains(c.box, c.clamped ? 0.5 : 0.0));
  }
}

TEST_CASE("heavy enclosed noise stays inside up to the repair floor") {
  const BBox clean(10, 20, 50, 50);
  Rng rng(6);
  int clamps = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto c = corrupt_box_detailed(clean, ExponentialEnclosed{0.5}, rng);
    clamps += c.clamped ? 1 : 0;
    REQUIRE(clean.contains(c.box, c.clamped ? 0.5 : 0.0));
  }
  CHECK(clamps > 1000);
}

TEST_CASE("absolute error spread scales with the box") {
  const int n = 100000;
  const auto small = boundary_errors(BBox(0, 0, 50, 50), GaussianSymmetric{0.1}, Boundary::kRight, n, 9);
  const auto large = boundary_errors(BBox(0, 0, 100, 100), GaussianSymmetric{0.1}, Boundary::kRight, n, 10);
  // relative errors times extent give absolute errors
  const double sd_small = estimate_noise_level(small) * 50.0;
  const double sd_large = estimate_noise_level(large) * 100.0;
  CHECK(sd_large / sd_small == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("left and right errors are uncorrelated") {
  const BBox clean(0, 0, 100, 100);
  Rng rng(77);
  std::vector<double> left, right;
  for (int i = 0; i < 100000; ++i) {
    const BBox n = corrupt_box(clean, GaussianSymmetric{0.1}, rng);
    left.push_back(n.left() / 100.0);
    right.push_back((n.right() - 100.0) / 100.0);
  }
  CHECK(std::abs(pearson(left, right)) < 0.02);
}

TEST_CASE("corrupt_dataset determinism and order independence") {
  CHECK(corrupt_dataset(std::vector<Instance>{}, GaussianSymmetric{0.1}, 1).empty());

  const auto clean = grid_instances(50);
  const auto a = corrupt_dataset(clean, GaussianSymmetric{0.1}, 42);
  const auto b = corrupt_dataset(clean, GaussianSymmetric{0.1}, 42);
  CHECK(a == b);

  auto shuffled = clean;
  std::reverse(shuffled.begin(), shuffled.end());
  std::rotate(shuffled.begin(), shuffled.begin() + 17, shuffled.end());
  const auto c = corrupt_dataset(shuffled, GaussianSymmetric{0.1}, 42);
  std::map<std::int64_t, BBox> by_id;
  for (const auto& inst : a) by_id[inst.id] = inst.box;
  for (const auto& inst : c) CHECK(by_id.at(inst.id) == inst.box);

  const auto d = corrupt_dataset(clean, GaussianSymmetric{0.1}, 43);
  CHECK_FALSE(a == d);

  for (std::size_t i = 0; i < clean.size(); ++i) {
    CHECK(a[i].id == clean[i].id);
    CHECK(a[i].image_id == clean[i].image_id);
    CHECK(a[i].category_id == clean[i].category_id);
  }
}

TEST_CASE("corrupt_dataset reports the failing instance") {
  auto clean = grid_instances(3);
  clean[1].box = BBox(5, 5, 5, 9);
  try {
    corrupt_dataset(clean, GaussianSymmetric{0.1}, 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("instance 107") != std::string::npos);
  }
}

TEST_CASE("corruption summary tracks gamma and clamps") {
  std::vector<Instance> clean;
  for (int i = 0; i < 20000; ++i) {
    Instance inst;
    inst.id = i;
    inst.box = BBox(0, 0, 40, 40);
    clean.push_back(inst);
  }
  CorruptionSummary s;
  corrupt_dataset(clean, GaussianSymmetric{0.1}, 3, &s);
  CHECK(s.instances == clean.size());
  CHECK(s.empirical_gamma == doctest::Approx(0.1).epsilon(0.03));
  CHECK(s.clamped == 0);

  // At gamma = 0.6 two opposite boundaries cross with noticeable probability.
  corrupt_dataset(clean, GaussianSymmetric{0.6}, 3, &s);
  CHECK(s.clamped > 0);
}
