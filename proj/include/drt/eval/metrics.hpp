#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <vector>

namespace drt::eval {

struct Box {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  bool valid() const { return x2 > x1 && y2 > y1; }
  double area() const { return (x2 - x1) * (y2 - y1); }
  bool operator==(const Box&) const = default;
};

struct Detection {
  Box box;
  int label = 0;
  double score = 1.0;

  bool operator==(const Detection&) const = default;
};

// Detections for one image.
using Detections = std::vector<Detection>;
// Detections for every image of a set, aligned by index.
using DetectionSet = std::vector<Detections>;

// Throws InvalidBox when either box is degenerate.
double iou(const Box& a, const Box& b);

struct ApOptions {
  double iou_threshold = 0.5;
  // Predictions scoring below this are dropped before matching.
  double score_threshold = 0.05;
  // When set, only these classes are scored (label-map intersection).
  std::optional<std::set<int>> classes;
};

struct ApResult {
  std::map<int, double> per_class;
  double mean_ap = 0.0;
  // Classes that have predictions but no references; not scored.
  std::vector<int> skipped;
};

// Score-ranked greedy matching per class across all images: each
// prediction (highest score first, ties by input order) takes the unmatched
// reference of its image with the highest IoU at or above the threshold.
// AP uses all-points interpolation; mAP averages over classes that have
// references. With no references at all, mAP is 1 when there are no
// predictions either and 0 otherwise.
ApResult average_precision(const DetectionSet& preds, const DetectionSet& refs, const ApOptions& opts = {});

struct SegmentationMask {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<int> labels;

  bool operator==(const SegmentationMask&) const = default;
};

// Pixel confusion counts accumulated over any number of masks.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t num_classes);

  // Throws ShapeMismatch on raster size mismatch and InvalidLabel on ids
  // outside [0, num_classes).
  void add(const SegmentationMask& pred, const SegmentationMask& ref);

  std::size_t num_classes() const { return n_; }
  std::size_t count(int ref, int pred) const { return counts_[static_cast<std::size_t>(ref) * n_ + pred]; }

  // IoU for every class whose pixels appear in the reference or the
  // prediction; classes absent from both are left out.
  std::map<int, double> per_class_iou(const std::optional<std::set<int>>& classes = std::nullopt) const;
  double mean_iou(const std::optional<std::set<int>>& classes = std::nullopt) const;

 private:
  std::size_t n_;
  std::vector<std::size_t> counts_;
};

double mean_iou(const SegmentationMask& pred, const SegmentationMask& ref, std::size_t num_classes);

}  // namespace drt::eval
