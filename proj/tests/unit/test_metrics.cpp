#include <doctest.h>

#include <random>

#include "drt/errors.hpp"
#include "drt/eval/metrics.hpp"
#include "oracles.hpp"

using namespace drt;
using namespace drt::eval;

namespace {

Detection det(double x1, double y1, double x2, double y2, int label = 0, double score = 1.0) {
  return {{x1, y1, x2, y2}, label, score};
}

SegmentationMask mask(std::size_t h, std::size_t w, std::vector<int> v) { return {h, w, std::move(v)}; }

}  // namespace

TEST_CASE("iou") {
  CHECK(iou({0, 0, 10, 10}, {0, 0, 10, 10}) == 1.0);
  CHECK(iou({0, 0, 10, 10}, {5, 0, 15, 10}) == doctest::Approx(1.0 / 3));
  CHECK(iou({0, 0, 1, 1}, {2, 2, 3, 3}) == 0.0);
  CHECK_THROWS_AS(iou({0, 0, 0, 1}, {0, 0, 1, 1}), InvalidBox);
}

TEST_CASE("average precision trivial cases") {
  const DetectionSet refs{{det(0, 0, 10, 10)}};
  CHECK(average_precision({{det(0, 0, 10, 10)}}, refs).mean_ap == 1.0);
  CHECK(average_precision({{}}, refs).mean_ap == 0.0);
  CHECK(average_precision({{}}, {{}}).mean_ap == 1.0);
  CHECK(average_precision({{det(0, 0, 10, 10)}}, {{}}).mean_ap == 0.0);
}

TEST_CASE("average precision with one hit and one miss") {
  const DetectionSet refs{{det(0, 0, 10, 10)}};
  // Hit at .9 then miss at .8: recall 1 reached at precision 1.
  const DetectionSet a{{det(0, 0, 10, 10, 0, 0.9), det(20, 20, 30, 30, 0, 0.8)}};
  CHECK(average_precision(a, refs).mean_ap == oracle::mean_ap(a, refs));
  CHECK(oracle::mean_ap(a, refs) == 1.0);
  // Miss ranked first halves the precision at full recall.
  const DetectionSet b{{det(0, 0, 10, 10, 0, 0.8), det(20, 20, 30, 30, 0, 0.9)}};
  CHECK(average_precision(b, refs).mean_ap == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("each reference is matched once") {
  const DetectionSet refs{{det(0, 0, 10, 10)}};
  const DetectionSet preds{{det(0, 0, 10, 10, 0, 0.9), det(0, 0, 10, 10, 0, 0.8)}};
  CHECK(average_precision(preds, refs).mean_ap == 1.0);
  const DetectionSet refs2{{det(0, 0, 10, 10), det(0, 0, 10, 10)}};
  const DetectionSet one{{det(0, 0, 10, 10, 0, 0.9)}};
  CHECK(average_precision(one, refs2).mean_ap == doctest::Approx(0.5));
}

TEST_CASE("score threshold, class filter and skipped classes") {
  const DetectionSet refs{{det(0, 0, 10, 10, 1)}};
  const DetectionSet low{{det(0, 0, 10, 10, 1, 0.01)}};
  CHECK(average_precision(low, refs).mean_ap == 0.0);
  const DetectionSet extra{{det(0, 0, 10, 10, 1, 0.9), det(0, 0, 10, 10, 2, 0.9)}};
  const auto r = average_precision(extra, refs);
  CHECK(r.mean_ap == 1.0);
  CHECK(r.skipped == std::vector<int>{2});
  ApOptions only2;
  only2.classes = std::set<int>{2};
  CHECK(average_precision(extra, refs, only2).per_class.empty());
  CHECK_THROWS_AS(average_precision({{}}, {{}, {}}), ShapeMismatch);
}

TEST_CASE("average precision agrees with the brute-force oracle on random instances") {
  std::mt19937_64 rng(5);
  auto coord = [&] { return static_cast<double>(rng() % 12); };
  for (int trial = 0; trial < 3000; ++trial) {
    const std::size_t images = 1 + rng() % 3;
    DetectionSet preds(images), refs(images);
    for (std::size_t i = 0; i < images; ++i) {
      for (int k = 0, n = static_cast<int>(rng() % 4); k < n; ++k) {
        const double x = coord(), y = coord();
        refs[i].push_back(det(x, y, x + 2 + rng() % 5, y + 2 + rng() % 5, static_cast<int>(rng() % 2)));
      }
      for (int k = 0, n = static_cast<int>(rng() % 5); k < n; ++k) {
        const double x = coord(), y = coord();
        preds[i].push_back(det(x, y, x + 2 + rng() % 5, y + 2 + rng() % 5, static_cast<int>(rng() % 2),
                               static_cast<double>(rng() % 5) / 4.0));
      }
    }
    CHECK(std::abs(average_precision(preds, refs).mean_ap - oracle::mean_ap(preds, refs)) <= 1e-12);
  }
}

TEST_CASE("mean iou hand case") {
  // ref: 0 0 / 1 1, pred: 0 1 / 1 1. Class 0: 1/2, class 1: 2/3.
  const auto ref = mask(2, 2, {0, 0, 1, 1});
  const auto pred = mask(2, 2, {0, 1, 1, 1});
  CHECK(mean_iou(pred, ref, 3) == doctest::Approx((0.5 + 2.0 / 3) / 2).epsilon(1e-15));
  CHECK(mean_iou(ref, ref, 3) == 1.0);
  CHECK(mean_iou(mask(1, 2, {0, 0}), mask(1, 2, {1, 1}), 2) == 0.0);
  CHECK_THROWS_AS(mean_iou(mask(1, 2, {0, 0}), mask(2, 1, {0, 0}), 2), ShapeMismatch);
  CHECK_THROWS_AS(mean_iou(mask(1, 1, {3}), mask(1, 1, {0}), 2), InvalidLabel);
}

TEST_CASE("confusion matrix accumulates over masks") {
  ConfusionMatrix cm(3);
  cm.add(mask(1, 2, {0, 1}), mask(1, 2, {0, 0}));
  cm.add(mask(1, 2, {2, 2}), mask(1, 2, {2, 1}));
  CHECK(cm.count(0, 0) == 1);
  CHECK(cm.count(0, 1) == 1);
  CHECK(cm.count(1, 2) == 1);
  CHECK(cm.count(2, 2) == 1);
  const auto per = cm.per_class_iou();
  CHECK(per.at(0) == 0.5);
  CHECK(per.at(1) == 0.0);
  CHECK(per.at(2) == 0.5);
  CHECK(cm.mean_iou(std::set<int>{0, 2}) == 0.5);
}

TEST_CASE("mean iou equals pixel counting on random rasters") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t h = 1 + rng() % 8, w = 1 + rng() % 8;
    const int k = 1 + static_cast<int>(rng() % 3);
    std::vector<int> p(h * w), r(h * w);
    for (auto& v : p) v = static_cast<int>(rng() % k);
    for (auto& v : r) v = static_cast<int>(rng() % k);
    CHECK(mean_iou(mask(h, w, p), mask(h, w, r), k) == oracle::mean_iou(p, r, k));
  }
}
