#pragma once

#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "drt/models/layers.hpp"
#include "drt/models/surrogate.hpp"

namespace drt::models {

// Output semantics of a network's final tensor.
enum class Head { classifier, dense };  // dense: per-pixel logits (K, H, W)

// Feed-forward stack of layers with named taps on layer outputs.
class SequentialModel final : public SurrogateModel {
 public:
  SequentialModel(std::string name, Shape input_shape, Head head = Head::classifier);
  SequentialModel(const SequentialModel& other);
  SequentialModel& operator=(const SequentialModel& other);
  SequentialModel(SequentialModel&&) noexcept = default;
  SequentialModel& operator=(SequentialModel&&) noexcept = default;

  // Appends a layer; when tap is non-empty the layer's output is exposed
  // under that key.
  SequentialModel& add(std::unique_ptr<Layer> layer, std::string tap = {});

  std::string name() const override { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }
  const std::vector<std::string>& layer_keys() const override { return keys_; }
  std::size_t num_classes() const override;
  Head head() const { return head_; }
  const Shape& input_shape() const { return input_shape_; }

  ForwardOutput forward(const Tensor& image, std::optional<std::string_view> tap = std::nullopt) const override;
  double feature_objective(const Tensor& image, std::string_view key, const FeatureObjective& objective,
                           Tensor& input_grad) const override;
  double classification_loss(const Tensor& image, int label, Tensor& input_grad) const override;

  // Runs the layers after the tap on a feature tensor captured at key.
  Tensor forward_from(std::string_view key, const Tensor& feature) const;

  // Output shape of every tap for the declared input shape.
  std::map<std::string, Shape> shape_table() const;

  // Training support: loss and accumulated parameter gradient for one
  // sample. For dense heads, targets holds one class per pixel and the loss
  // is the class_weights-weighted mean over pixels (uniform when empty).
  double loss_and_param_grad(const Tensor& image, std::span<const int> targets, std::span<double> param_grad,
                             std::span<const double> class_weights = {}) const;

  std::size_t param_count() const;
  std::vector<double> flat_params() const;
  void set_flat_params(std::span<const double> values);
  void init_params(std::mt19937_64& rng);

  std::size_t layer_count() const { return layers_.size(); }
  const Layer& layer(std::size_t i) const { return *layers_.at(i); }

 private:
  std::size_t tap_index(std::string_view key) const;
  void run(const Tensor& image, std::size_t last, std::vector<Tensor>& acts) const;
  void backprop(std::vector<Tensor>& acts, std::size_t from, Tensor grad, Tensor* input_grad,
                std::span<double> param_grad) const;

  std::string name_;
  Shape input_shape_;
  Head head_;
  std::vector<std::unique_ptr<Layer>> layers_;
  std::vector<std::string> keys_;
  std::map<std::string, std::size_t, std::less<>> taps_;
};

}  // namespace drt::models
