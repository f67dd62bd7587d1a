#include <doctest.h>

#include <cmath>
#include <vector>

#include "boxfix/ap.hpp"
#include "boxfix/error.hpp"
#include "boxfix/random.hpp"

using namespace boxfix;

namespace {

Instance gt(std::int64_t id, std::int64_t image, const BBox& box, std::int64_t cat = 1, bool crowd = false) {
  Instance i;
  i.id = id;
  i.image_id = image;
  i.category_id = cat;
  i.box = box;
  i.iscrowd = crowd;
  return i;
}

APOptions at_half() {
  APOptions o;
  o.thresholds = {0.5};
  return o;
}

struct Scenario {
  std::vector<Instance> truth;
  std::vector<Prediction> preds;
};

Scenario random_scenario(Rng& rng) {
  Scenario s;
  const int images = 1 + static_cast<int>(rng.next_u64() % 4);
  std::int64_t id = 1;
  for (int img = 1; img <= images; ++img) {
    const int n = static_cast<int>(rng.next_u64() % 5);
    for (int k = 0; k < n; ++k) {
      const double x = rng.uniform(0, 300), y = rng.uniform(0, 300);
      const BBox box(x, y, x + rng.uniform(10, 120), y + rng.uniform(10, 120));
      const std::int64_t cat = 1 + static_cast<std::int64_t>(rng.next_u64() % 2);
      s.truth.push_back(gt(id++, img, box, cat));
      const int dets = static_cast<int>(rng.next_u64() % 3);
      for (int d = 0; d < dets; ++d) {
        const double j = rng.uniform(0.0, 0.3);
        const BBox p = BBox::sanitized(box.left() + j * box.width() * rng.normal(),
                                       box.top() + j * box.height() * rng.normal(),
                                       box.right() + j * box.width() * rng.normal(),
                                       box.bottom() + j * box.height() * rng.normal(), nullptr);
        s.preds.emplace_back(img, p, cat, rng.uniform());
      }
    }
    const int spurious = static_cast<int>(rng.next_u64() % 3);
    for (int k = 0; k < spurious; ++k) {
      const double x = rng.uniform(0, 300), y = rng.uniform(0, 300);
      s.preds.emplace_back(img, BBox(x, y, x + 40, y + 40), 1 + static_cast<std::int64_t>(rng.next_u64() % 2),
                           rng.uniform());
    }
  }
  return s;
}

}  // namespace

TEST_CASE("perfect predictions give AP 1 at every threshold") {
  const std::vector<Instance> truth{gt(1, 1, BBox(0, 0, 50, 50)), gt(2, 1, BBox(60, 60, 90, 120)),
                                    gt(3, 2, BBox(5, 5, 15, 25), 2)};
  std::vector<Prediction> preds;
  for (const auto& g : truth) preds.emplace_back(g.image_id, g.box, g.category_id, 1.0);
  const auto r = evaluate_ap(preds, truth);
  REQUIRE(r.per_threshold.size() == 10);
  for (double v : r.per_threshold) CHECK(v == 1.0);
  CHECK(r.map == 1.0);
  CHECK(r.per_category.at(1) == 1.0);
  CHECK(r.per_category.at(2) == 1.0);
}

TEST_CASE("no predictions give AP 0") {
  const std::vector<Instance> truth{gt(1, 1, BBox(0, 0, 50, 50))};
  const auto r = evaluate_ap(std::vector<Prediction>{}, truth);
  CHECK(r.map == 0.0);
  for (double v : r.per_threshold) CHECK(v == 0.0);
}

TEST_CASE("true positive ranked above a false positive") {
  const std::vector<Instance> truth{gt(1, 1, BBox(0, 0, 100, 100))};
  // IoU 0.9: 90x100 inside the 100x100 box
  const std::vector<Prediction> preds{{1, BBox(0, 0, 90, 100), 1, 0.9}, {1, BBox(300, 300, 400, 400), 1, 0.8}};
  CHECK(evaluate_ap(preds, truth, at_half()).map == 1.0);
}

TEST_CASE("mixed ranking, hand-computed curves") {
  const std::vector<Instance> truth{gt(1, 1, BBox(0, 0, 100, 100)), gt(2, 1, BBox(200, 0, 300, 100))};
  const BBox miss(500, 500, 550, 550);

  // FP, TP, TP: precision 0, 1/2, 2/3 -> interpolated 2/3 everywhere
  const std::vector<Prediction> a{{1, miss, 1, 0.9}, {1, truth[0].box, 1, 0.8}, {1, truth[1].box, 1, 0.7}};
  CHECK(evaluate_ap(a, truth, at_half()).map == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  // TP, FP, TP: 51 recall points at 1, 50 at 2/3
  const std::vector<Prediction> b{{1, truth[0].box, 1, 0.9}, {1, miss, 1, 0.8}, {1, truth[1].box, 1, 0.7}};
  CHECK(evaluate_ap(b, truth, at_half()).map == doctest::Approx(253.0 / 303.0).epsilon(1e-12));

  // one of two found: recall tops out at 0.5 -> 51 of 101 points
  const std::vector<Prediction> c{{1, truth[0].box, 1, 0.9}};
  CHECK(evaluate_ap(c, truth, at_half()).map == doctest::Approx(51.0 / 101.0).epsilon(1e-12));
}

TEST_CASE("a ground truth box is matched at most once") {
  const std::vector<Instance> truth{gt(1, 1, BBox(0, 0, 100, 100))};
  const std::vector<Prediction> dup{{1, truth[0].box, 1, 0.9}, {1, truth[0].box, 1, 0.8}};
  // TP then FP: precision 1 up to recall 1
  CHECK(evaluate_ap(dup, truth, at_half()).map == 1.0);
  const std::vector<Prediction> wrong_image{{2, truth[0].box, 1, 0.9}};
  CHECK(evaluate_ap(wrong_image, truth, at_half()).map == 0.0);
  const std::vector<Prediction> wrong_cat{{1, truth[0].box, 2, 0.9}};
  CHECK(evaluate_ap(wrong_cat, truth, at_half()).map == 0.0);
}

TEST_CASE("crowd ground truth is outside matching and recall") {
  const std::vector<Instance> truth{gt(1, 1, BBox(0, 0, 100, 100)), gt(2, 1, BBox(200, 0, 300, 100), 1, true)};
  const std::vector<Prediction> hit{{1, truth[0].box, 1, 0.9}};
  CHECK(evaluate_ap(hit, truth, at_half()).map == 1.0);
  // a detection on the crowd region finds nothing to match
  const std::vector<Prediction> on_crowd{{1, truth[1].box, 1, 0.95}, {1, truth[0].box, 1, 0.9}};
  CHECK(evaluate_ap(on_crowd, truth, at_half()).map == doctest::Approx(0.5).epsilon(1e-12));

  const std::vector<Instance> only_crowd{gt(5, 1, BBox(0, 0, 10, 10), 1, true)};
  const auto r = evaluate_ap(hit, only_crowd, at_half());
  CHECK(r.map == 0.0);
  CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("identical ground truth boxes are each matchable once") {
  // two identical GT boxes; the first detection takes id 4, the second id 9
  const std::vector<Instance> truth{gt(9, 1, BBox(0, 0, 10, 10)), gt(4, 1, BBox(0, 0, 10, 10))};
  const std::vector<Prediction> preds{{1, BBox(0, 0, 10, 10), 1, 0.9}, {1, BBox(0, 0, 10, 10), 1, 0.8}};
  CHECK(evaluate_ap(preds, truth, at_half()).map == 1.0);
}

TEST_CASE("unknown categories are ignored with a warning") {
  const std::vector<Instance> truth{gt(1, 1, BBox(0, 0, 10, 10))};
  const std::vector<Prediction> preds{{1, BBox(0, 0, 10, 10), 1, 0.5}, {1, BBox(0, 0, 10, 10), 42, 0.99}};
  const auto r = evaluate_ap(preds, truth, at_half());
  CHECK(r.map == 1.0);
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].find("42") != std::string::npos);
}

TEST_CASE("threshold validation") {
  const std::vector<Instance> truth{gt(1, 1, BBox(0, 0, 10, 10))};
  APOptions o;
  o.thresholds = {};
  CHECK_THROWS_AS(evaluate_ap(std::vector<Prediction>{}, truth, o), Error);
  o.thresholds = {0.5, 0.5};
  CHECK_THROWS_AS(evaluate_ap(std::vector<Prediction>{}, truth, o), Error);
  o.thresholds = {0.7, 0.5};
  CHECK_THROWS_AS(evaluate_ap(std::vector<Prediction>{}, truth, o), Error);
  o.thresholds = {0.5, 1.5};
  CHECK_THROWS_AS(evaluate_ap(std::vector<Prediction>{}, truth, o), Error);
}

TEST_CASE("size breakdown") {
  const std::vector<Instance> truth{gt(1, 1, BBox(0, 0, 20, 20)), gt(2, 1, BBox(100, 100, 300, 300))};
  const std::vector<Prediction> preds{{1, truth[1].box, 1, 0.9}};
  APOptions o = at_half();
  o.size_breakdown = true;
  const auto r = evaluate_ap(preds, truth, o);
  CHECK(r.per_size.at("small") == 0.0);
  CHECK(r.per_size.at("large") == 1.0);
  CHECK(r.per_size.count("medium") == 0);
}

TEST_CASE("AP properties over random scenes") {
  Rng rng(2718);
  for (int trial = 0; trial < 100; ++trial) {
    const Scenario s = random_scenario(rng);
    const auto r = evaluate_ap(s.preds, s.truth);
    for (double v : r.per_threshold) {
      REQUIRE(v >= 0.0);
      REQUIRE(v <= 1.0);
    }
    for (std::size_t i = 1; i < r.per_threshold.size(); ++i) {
      REQUIRE(r.per_threshold[i] <= r.per_threshold[i - 1]);
    }

    auto warped = s.preds;
    for (auto& p : warped)
      for (auto& cs : p.scores) cs.score = std::sqrt(cs.score);
    const auto w = evaluate_ap(warped, s.truth);
    REQUIRE(w.per_threshold == r.per_threshold);
  }
}
