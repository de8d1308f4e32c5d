#include "drt/eval/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "drt/errors.hpp"

namespace drt::eval {

double iou(const Box& a, const Box& b) {
  if (!a.valid() || !b.valid()) throw InvalidBox("boxes need x2 > x1 and y2 > y1");
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

namespace {

struct Ranked {
  double score;
  std::size_t image;
  std::size_t index;
};

double class_ap(int cls, const DetectionSet& preds, const DetectionSet& refs, const ApOptions& opts,
                std::size_t num_refs) {
  std::vector<Ranked> ranked;
  for (std::size_t img = 0; img < preds.size(); ++img) {
    for (std::size_t k = 0; k < preds[img].size(); ++k) {
      const auto& d = preds[img][k];
      if (d.label == cls && d.score >= opts.score_threshold) ranked.push_back({d.score, img, k});
    }
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) { return a.score > b.score; });

  std::vector<std::vector<bool>> taken(refs.size());
  for (std::size_t img = 0; img < refs.size(); ++img) taken[img].assign(refs[img].size(), false);

  std::vector<double> precision, recall;
  std::size_t tp = 0;
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    const auto& pred = preds[ranked[r].image][ranked[r].index];
    const auto& img_refs = refs[ranked[r].image];
    double best = opts.iou_threshold;
    std::optional<std::size_t> match;
    for (std::size_t j = 0; j < img_refs.size(); ++j) {
      if (img_refs[j].label != cls || taken[ranked[r].image][j]) continue;
      const double o = iou(pred.box, img_refs[j].box);
      if (o >= best && (!match || o > best)) {
        best = o;
        match = j;
      }
    }
    if (match) {
      taken[ranked[r].image][*match] = true;
      ++tp;
    }
    precision.push_back(static_cast<double>(tp) / static_cast<double>(r + 1));
    recall.push_back(static_cast<double>(tp) / static_cast<double>(num_refs));
  }

  // All-points interpolation: precision envelope integrated over recall.
  for (std::size_t i = precision.size(); i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double ap = 0.0, prev_recall = 0.0;
  for (std::size_t i = 0; i < precision.size(); ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return ap;
}

}  // namespace

ApResult average_precision(const DetectionSet& preds, const DetectionSet& refs, const ApOptions& opts) {
  if (preds.size() != refs.size()) throw ShapeMismatch("prediction and reference sets cover different image counts");
  std::map<int, std::size_t> ref_counts;
  std::set<int> pred_classes;
  const auto keep = [&](int cls) { return !opts.classes || opts.classes->count(cls); };
  for (const auto& img : refs) {
    for (const auto& d : img) {
      if (!d.box.valid()) throw InvalidBox("reference box is degenerate");
      if (keep(d.label)) ++ref_counts[d.label];
    }
  }
  for (const auto& img : preds) {
    for (const auto& d : img) {
      if (!d.box.valid()) throw InvalidBox("predicted box is degenerate");
      if (d.score >= opts.score_threshold && keep(d.label)) pred_classes.insert(d.label);
    }
  }

  ApResult result;
  for (const auto& [cls, count] : ref_counts) result.per_class[cls] = class_ap(cls, preds, refs, opts, count);
  for (int cls : pred_classes) {
    if (!ref_counts.count(cls)) result.skipped.push_back(cls);
  }
  if (result.per_class.empty()) {
    result.mean_ap = pred_classes.empty() ? 1.0 : 0.0;
  } else {
    double total = 0.0;
    for (const auto& [cls, ap] : result.per_class) total += ap;
    result.mean_ap = total / static_cast<double>(result.per_class.size());
  }
  return result;
}

ConfusionMatrix::ConfusionMatrix(std::size_t num_classes) : n_(num_classes), counts_(num_classes * num_classes, 0) {}

void ConfusionMatrix::add(const SegmentationMask& pred, const SegmentationMask& ref) {
  if (pred.height != ref.height || pred.width != ref.width || pred.labels.size() != ref.labels.size() ||
      ref.labels.size() != ref.height * ref.width) {
    throw ShapeMismatch("segmentation rasters differ in shape");
  }
  for (std::size_t i = 0; i < ref.labels.size(); ++i) {
    const int r = ref.labels[i], p = pred.labels[i];
    if (r < 0 || p < 0 || static_cast<std::size_t>(r) >= n_ || static_cast<std::size_t>(p) >= n_) {
      throw InvalidLabel("class id outside the label map");
    }
    ++counts_[static_cast<std::size_t>(r) * n_ + p];
  }
}

std::map<int, double> ConfusionMatrix::per_class_iou(const std::optional<std::set<int>>& classes) const {
  std::map<int, double> out;
  for (std::size_t c = 0; c < n_; ++c) {
    if (classes && !classes->count(static_cast<int>(c))) continue;
    std::size_t ref_total = 0, pred_total = 0;
    for (std::size_t k = 0; k < n_; ++k) {
      ref_total += counts_[c * n_ + k];
      pred_total += counts_[k * n_ + c];
    }
    const std::size_t inter = counts_[c * n_ + c];
    const std::size_t uni = ref_total + pred_total - inter;
    if (uni == 0) continue;
    out[static_cast<int>(c)] = static_cast<double>(inter) / static_cast<double>(uni);
  }
  return out;
}

double ConfusionMatrix::mean_iou(const std::optional<std::set<int>>& classes) const {
  const auto per = per_class_iou(classes);
  // Nothing to score in either raster: the two agree everywhere.
  if (per.empty()) return 1.0;
  double total = 0.0;
  for (const auto& [c, v] : per) total += v;
  return total / static_cast<double>(per.size());
}

double mean_iou(const SegmentationMask& pred, const SegmentationMask& ref, std::size_t num_classes) {
  ConfusionMatrix cm(num_classes);
  cm.add(pred, ref);
  return cm.mean_iou();
}

}  // namespace drt::eval
