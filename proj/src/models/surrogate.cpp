#include "drt/models/surrogate.hpp"

#include <algorithm>
#include <cmath>

#include "drt/errors.hpp"

namespace drt::models {

bool SurrogateModel::has_layer(std::string_view key) const {
  const auto& keys = layer_keys();
  return std::find(keys.begin(), keys.end(), key) != keys.end();
}

void SurrogateModel::require_layer(std::string_view key) const {
  if (!has_layer(key)) {
    throw InvalidLayer("model '" + name() + "' has no layer '" + std::string(key) + "'");
  }
}

int SurrogateModel::predict(const Tensor& image) const {
  const Tensor logits = forward(image).logits;
  if (logits.size() == 0) throw InvalidLabel("model '" + name() + "' has no classification head");
  return static_cast<int>(std::max_element(logits.data.begin(), logits.data.end()) - logits.data.begin());
}

FeatureMap tap_features(const SurrogateModel& model, const Tensor& image, std::string_view key) {
  model.require_layer(key);
  auto out = model.forward(image, key);
  return std::move(*out.feature);
}

std::vector<FeatureMap> tap_features(const SurrogateModel& model, const ImageBatch& batch, std::string_view key) {
  std::vector<FeatureMap> maps;
  maps.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) maps.push_back(tap_features(model, batch.image(i), key));
  return maps;
}

double softmax_cross_entropy(std::span<const double> logits, int label, std::span<double> grad) {
  if (label < 0 || static_cast<std::size_t>(label) >= logits.size()) {
    throw InvalidLabel("label " + std::to_string(label) + " outside [0, " + std::to_string(logits.size()) + ")");
  }
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    grad[i] = std::exp(logits[i] - peak);
    total += grad[i];
  }
  for (auto& g : grad) g /= total;
  const double loss = -(logits[label] - peak - std::log(total));
  grad[label] -= 1.0;
  return loss;
}

IdentityModel::IdentityModel(std::size_t num_classes, std::vector<double> head)
    : classes_(num_classes), head_(std::move(head)) {}

ForwardOutput IdentityModel::forward(const Tensor& image, std::optional<std::string_view> tap) const {
  ForwardOutput out;
  if (tap) {
    require_layer(*tap);
    out.feature = FeatureMap{"input", image};
  }
  if (classes_ > 0) {
    const std::size_t n = image.size();
    if (head_.size() != classes_ * n) throw ShapeMismatch("identity head does not match input size");
    out.logits = Tensor(Shape{classes_});
    for (std::size_t c = 0; c < classes_; ++c) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += head_[c * n + i] * image[i];
      out.logits[c] = acc;
    }
  }
  return out;
}

double IdentityModel::feature_objective(const Tensor& image, std::string_view key, const FeatureObjective& objective,
                                        Tensor& input_grad) const {
  require_layer(key);
  input_grad = Tensor(image.shape);
  return objective(image.values(), input_grad.values());
}

double IdentityModel::classification_loss(const Tensor& image, int label, Tensor& input_grad) const {
  if (classes_ == 0) throw InvalidLabel("identity model has no classification head");
  const Tensor logits = forward(image, std::nullopt).logits;
  std::vector<double> dlogits(classes_);
  const double loss = softmax_cross_entropy(logits.values(), label, dlogits);
  const std::size_t n = image.size();
  input_grad = Tensor(image.shape);
  for (std::size_t c = 0; c < classes_; ++c) {
    for (std::size_t i = 0; i < n; ++i) input_grad[i] += dlogits[c] * head_[c * n + i];
  }
  return loss;
}

}  // namespace drt::models
