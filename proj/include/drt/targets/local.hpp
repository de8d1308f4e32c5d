#pragma once

#include "drt/models/network.hpp"
#include "drt/targets/adapter.hpp"

namespace drt::targets {

class LocalClassifier final : public TargetAdapter {
 public:
  LocalClassifier(models::SequentialModel model, LabelMap labels);

  Task task() const override { return Task::classify; }
  const LabelMap& label_map() const override { return labels_; }
  std::string identity() const override { return "local:" + model_.name(); }
  Prediction invoke(const Tensor& image) const override;

 private:
  models::SequentialModel model_;
  LabelMap labels_;
};

// Per-pixel argmax of a dense-head model.
class LocalSegmenter final : public TargetAdapter {
 public:
  LocalSegmenter(models::SequentialModel model, LabelMap labels);

  Task task() const override { return Task::segment; }
  const LabelMap& label_map() const override { return labels_; }
  std::string identity() const override { return "local:" + model_.name(); }
  Prediction invoke(const Tensor& image) const override;

 private:
  models::SequentialModel model_;
  LabelMap labels_;
};

// Turns a dense-head model into a detector: every 4-connected region of a
// single non-background label becomes one box, scored by the mean softmax
// probability of that label over the region. Label 0 is background; a
// region of label l is reported as detection class l.
class LocalDetector final : public TargetAdapter {
 public:
  LocalDetector(models::SequentialModel model, LabelMap labels, std::size_t min_pixels = 3);

  Task task() const override { return Task::detect; }
  const LabelMap& label_map() const override { return labels_; }
  std::string identity() const override { return "local:" + model_.name() + "#detect"; }
  Prediction invoke(const Tensor& image) const override;

 private:
  models::SequentialModel model_;
  LabelMap labels_;
  std::size_t min_pixels_;
};

// Connected components over a label raster; exposed for testing.
eval::Detections regions_to_detections(const eval::SegmentationMask& mask, const std::vector<double>& confidence,
                                       std::size_t min_pixels);

}  // namespace drt::targets
