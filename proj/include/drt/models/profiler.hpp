#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "drt/attack/config.hpp"
#include "drt/models/surrogate.hpp"

namespace drt::models {

struct LayerProfileRow {
  std::string layer;
  double std_before = 0.0;  // mean over probe images
  double std_after = 0.0;
  double delta = 0.0;
  std::vector<double> per_image_before;
  std::vector<double> per_image_after;
  std::optional<double> downstream_metric;
};

struct LayerProfile {
  std::vector<LayerProfileRow> rows;
  std::string recommended;  // layer with the largest delta
};

// Scores an adversarial batch produced for one layer, e.g. a relative
// metric on a transfer target.
using AdversarialEvaluator = std::function<double(const std::string& layer, const ImageBatch& adversarial)>;

// Runs dispersion reduction against every layer of the model in turn.
LayerProfile profile_layers(const SurrogateModel& model, const ImageBatch& probe, const attack::AttackConfig& cfg,
                            const AdversarialEvaluator& evaluator = {}, std::size_t workers = 1);

}  // namespace drt::models
