#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "drt/eval/metrics.hpp"
#include "drt/tensor.hpp"

namespace drt::targets {

enum class Task { classify, detect, segment };

std::string_view to_string(Task task);
Task task_from_string(std::string_view name);

// Class id -> display name.
using LabelMap = std::vector<std::string>;

// Classification yields a class id (-1 when the target returns no label).
using Prediction = std::variant<int, eval::Detections, eval::SegmentationMask>;

// Opaque target: images in, predictions out. No gradients, logits or model
// internals cross this interface.
class TargetAdapter {
 public:
  virtual ~TargetAdapter() = default;

  virtual Task task() const = 0;
  virtual const LabelMap& label_map() const = 0;
  // Recorded in reports, e.g. "local:desk_cnn@2".
  virtual std::string identity() const = 0;

  // Throws TargetFailure (or a subclass) when the target cannot answer.
  virtual Prediction invoke(const Tensor& image) const = 0;
};

// Wraps a checkpoint directory ({root}/{name}/{seed}). Classifier
// checkpoints become classify targets; segmenter checkpoints become segment
// targets, or detect targets (connected components of the predicted mask)
// when task is detect. Throws LoadFailure.
std::unique_ptr<TargetAdapter> local_adapter(const std::filesystem::path& model_spec,
                                             std::optional<Task> task = std::nullopt);

}  // namespace drt::targets
