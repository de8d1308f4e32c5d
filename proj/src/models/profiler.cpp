#include "drt/models/profiler.hpp"

#include <numeric>

#include "drt/attack/attacks.hpp"
#include "drt/attack/dispersion.hpp"
#include "drt/errors.hpp"

namespace drt::models {

namespace {

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

LayerProfile profile_layers(const SurrogateModel& model, const ImageBatch& probe, const attack::AttackConfig& cfg,
                            const AdversarialEvaluator& evaluator, std::size_t workers) {
  if (probe.empty()) throw DatasetEmpty("layer profiling needs at least one probe image");
  LayerProfile profile;
  double best_delta = 0.0;
  for (const auto& layer : model.layer_keys()) {
    attack::AttackConfig layer_cfg = cfg;
    layer_cfg.target_layer = layer;
    const auto result = attack::dr_attack(probe, model, layer_cfg, workers);

    LayerProfileRow row;
    row.layer = layer;
    for (std::size_t i = 0; i < probe.size(); ++i) {
      row.per_image_before.push_back(result.traces[i].records.front().objective);
      row.per_image_after.push_back(attack::dispersion(tap_features(model, result.adversarial.image(i), layer)));
    }
    row.std_before = mean(row.per_image_before);
    row.std_after = mean(row.per_image_after);
    row.delta = row.std_before - row.std_after;
    if (evaluator) row.downstream_metric = evaluator(layer, result.adversarial);
    if (profile.recommended.empty() || row.delta > best_delta) {
      best_delta = row.delta;
      profile.recommended = layer;
    }
    profile.rows.push_back(std::move(row));
  }
  return profile;
}

}  // namespace drt::models
