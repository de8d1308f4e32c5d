#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "drt/tensor.hpp"

namespace drt::models {

// Scalar function of a feature map. Writes d(objective)/d(values) into grad
// and returns the objective value.
using FeatureObjective = std::function<double(std::span<const double> values, std::span<double> grad)>;

struct ForwardOutput {
  Tensor logits;
  std::optional<FeatureMap> feature;
};

// White-box model the attacks differentiate through. All methods operate on
// a single image (C, H, W) in pixel units and are const: a model may be
// shared read-only across workers.
class SurrogateModel {
 public:
  virtual ~SurrogateModel() = default;

  virtual std::string name() const = 0;
  virtual const std::vector<std::string>& layer_keys() const = 0;
  virtual std::size_t num_classes() const = 0;

  virtual ForwardOutput forward(const Tensor& image, std::optional<std::string_view> tap = std::nullopt) const = 0;

  // Evaluates objective(feature at key) and writes its gradient with respect
  // to the input image into input_grad.
  virtual double feature_objective(const Tensor& image, std::string_view key,
                                   const FeatureObjective& objective, Tensor& input_grad) const = 0;

  // Softmax cross-entropy of the logits against label, with input gradient.
  virtual double classification_loss(const Tensor& image, int label, Tensor& input_grad) const = 0;

  bool has_layer(std::string_view key) const;
  void require_layer(std::string_view key) const;
  int predict(const Tensor& image) const;
};

FeatureMap tap_features(const SurrogateModel& model, const Tensor& image, std::string_view key);
std::vector<FeatureMap> tap_features(const SurrogateModel& model, const ImageBatch& batch, std::string_view key);

// Softmax cross-entropy on a logit vector; fills d(loss)/d(logits).
double softmax_cross_entropy(std::span<const double> logits, int label, std::span<double> grad);

// Feature extractor is the identity: the single tap "input" returns the
// image itself. An optional linear head W (k x n) gives logits W * a.
class IdentityModel final : public SurrogateModel {
 public:
  IdentityModel() = default;
  IdentityModel(std::size_t num_classes, std::vector<double> head);

  std::string name() const override { return "identity"; }
  const std::vector<std::string>& layer_keys() const override { return keys_; }
  std::size_t num_classes() const override { return classes_; }

  ForwardOutput forward(const Tensor& image, std::optional<std::string_view> tap) const override;
  double feature_objective(const Tensor& image, std::string_view key, const FeatureObjective& objective,
                           Tensor& input_grad) const override;
  double classification_loss(const Tensor& image, int label, Tensor& input_grad) const override;

 private:
  std::vector<std::string> keys_{"input"};
  std::size_t classes_ = 0;
  std::vector<double> head_;
};

}  // namespace drt::models
