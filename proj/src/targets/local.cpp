#include "drt/targets/local.hpp"

#include <algorithm>
#include <cmath>

#include "drt/errors.hpp"
#include "drt/models/checkpoint.hpp"

namespace drt::targets {

std::string_view to_string(Task task) {
  switch (task) {
    case Task::classify: return "classify";
    case Task::detect: return "detect";
    case Task::segment: return "segment";
  }
  return "?";
}

Task task_from_string(std::string_view name) {
  if (name == "classify") return Task::classify;
  if (name == "detect") return Task::detect;
  if (name == "segment") return Task::segment;
  throw InvalidConfig("task", "unknown task '" + std::string(name) + "' (expected classify, detect or segment)");
}

namespace {

struct DenseOutput {
  eval::SegmentationMask mask;
  std::vector<double> confidence;  // softmax probability of the argmax label
};

DenseOutput dense_argmax(const models::SequentialModel& model, const Tensor& image) {
  const Tensor out = model.forward(image).logits;
  const std::size_t k = out.dim(0), h = out.dim(1), w = out.dim(2), plane = h * w;
  DenseOutput d;
  d.mask = {h, w, std::vector<int>(plane, 0)};
  d.confidence.assign(plane, 0.0);
  for (std::size_t p = 0; p < plane; ++p) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < k; ++c) {
      if (out[c * plane + p] > out[best * plane + p]) best = c;
    }
    double total = 0.0;
    for (std::size_t c = 0; c < k; ++c) total += std::exp(out[c * plane + p] - out[best * plane + p]);
    d.mask.labels[p] = static_cast<int>(best);
    d.confidence[p] = 1.0 / total;
  }
  return d;
}

}  // namespace

LocalClassifier::LocalClassifier(models::SequentialModel model, LabelMap labels)
    : model_(std::move(model)), labels_(std::move(labels)) {}

Prediction LocalClassifier::invoke(const Tensor& image) const {
  try {
    return model_.predict(image);
  } catch (const ShapeMismatch& e) {
    throw TargetFailure(identity() + ": " + e.what());
  }
}

LocalSegmenter::LocalSegmenter(models::SequentialModel model, LabelMap labels)
    : model_(std::move(model)), labels_(std::move(labels)) {}

Prediction LocalSegmenter::invoke(const Tensor& image) const {
  try {
    return dense_argmax(model_, image).mask;
  } catch (const ShapeMismatch& e) {
    throw TargetFailure(identity() + ": " + e.what());
  }
}

LocalDetector::LocalDetector(models::SequentialModel model, LabelMap labels, std::size_t min_pixels)
    : model_(std::move(model)), labels_(std::move(labels)), min_pixels_(min_pixels) {}

Prediction LocalDetector::invoke(const Tensor& image) const {
  try {
    const auto d = dense_argmax(model_, image);
    return regions_to_detections(d.mask, d.confidence, min_pixels_);
  } catch (const ShapeMismatch& e) {
    throw TargetFailure(identity() + ": " + e.what());
  }
}

eval::Detections regions_to_detections(const eval::SegmentationMask& mask, const std::vector<double>& confidence,
                                       std::size_t min_pixels) {
  const std::size_t h = mask.height, w = mask.width;
  std::vector<bool> seen(h * w, false);
  eval::Detections out;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < h * w; ++start) {
    const int label = mask.labels[start];
    if (label == 0 || seen[start]) continue;
    std::size_t x1 = w, y1 = h, x2 = 0, y2 = 0, count = 0;
    double conf = 0.0;
    stack.assign(1, start);
    seen[start] = true;
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      const std::size_t y = p / w, x = p % w;
      x1 = std::min(x1, x);
      y1 = std::min(y1, y);
      x2 = std::max(x2, x);
      y2 = std::max(y2, y);
      conf += confidence[p];
      ++count;
      const auto visit = [&](std::size_t q) {
        if (!seen[q] && mask.labels[q] == label) {
          seen[q] = true;
          stack.push_back(q);
        }
      };
      if (x > 0) visit(p - 1);
      if (x + 1 < w) visit(p + 1);
      if (y > 0) visit(p - w);
      if (y + 1 < h) visit(p + w);
    }
    if (count < min_pixels) continue;
    out.push_back({eval::Box{double(x1), double(y1), double(x2 + 1), double(y2 + 1)}, label,
                   conf / static_cast<double>(count)});
  }
  return out;
}

std::unique_ptr<TargetAdapter> local_adapter(const std::filesystem::path& model_spec, std::optional<Task> task) {
  auto loaded = models::load_checkpoint(model_spec);
  if (loaded.model.head() == models::Head::classifier) {
    if (task && *task != Task::classify) {
      throw LoadFailure("checkpoint '" + model_spec.string() + "' is a classifier, cannot serve task " +
                        std::string(to_string(*task)));
    }
    return std::make_unique<LocalClassifier>(std::move(loaded.model), std::move(loaded.meta.class_names));
  }
  if (task && *task == Task::classify) {
    throw LoadFailure("checkpoint '" + model_spec.string() + "' is a dense model, cannot serve task classify");
  }
  if (task && *task == Task::detect) {
    return std::make_unique<LocalDetector>(std::move(loaded.model), std::move(loaded.meta.class_names));
  }
  return std::make_unique<LocalSegmenter>(std::move(loaded.model), std::move(loaded.meta.class_names));
}

}  // namespace drt::targets
