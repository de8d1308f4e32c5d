#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "drt/tensor.hpp"

namespace drt::models {

// A differentiable layer operating on one sample. Parameters live in a flat
// vector so optimizers and checkpoints can treat every layer uniformly.
class Layer {
 public:
  virtual ~Layer() = default;

  virtual std::string kind() const = 0;
  virtual Shape output_shape(const Shape& input) const = 0;
  virtual void forward(const Tensor& input, Tensor& output) const = 0;

  // Given dL/d(output), writes dL/d(input) into grad_input (when non-null)
  // and accumulates dL/d(params) into param_grad (when non-empty).
  virtual void backward(const Tensor& input, const Tensor& output, const Tensor& grad_output,
                        Tensor* grad_input, std::span<double> param_grad) const = 0;

  virtual std::unique_ptr<Layer> clone() const = 0;

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

 protected:
  std::vector<double> params_;
};

// Maps [0, 255] pixels to [-0.5, 0.5].
class PixelNormalize final : public Layer {
 public:
  std::string kind() const override { return "normalize"; }
  Shape output_shape(const Shape& input) const override { return input; }
  void forward(const Tensor& input, Tensor& output) const override;
  void backward(const Tensor& input, const Tensor& output, const Tensor& grad_output, Tensor* grad_input,
                std::span<double> param_grad) const override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<PixelNormalize>(*this); }
};

// Stride-1 convolution with zero "same" padding and an odd square kernel.
// Weight layout [out][in][ky][kx] followed by the bias vector.
class Conv2d final : public Layer {
 public:
  Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel);

  std::string kind() const override { return "conv"; }
  Shape output_shape(const Shape& input) const override;
  void forward(const Tensor& input, Tensor& output) const override;
  void backward(const Tensor& input, const Tensor& output, const Tensor& grad_output, Tensor* grad_input,
                std::span<double> param_grad) const override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv2d>(*this); }

  std::size_t in_channels() const { return in_; }
  std::size_t out_channels() const { return out_; }
  std::size_t kernel() const { return k_; }
  std::size_t weight_count() const { return out_ * in_ * k_ * k_; }

 private:
  std::size_t in_, out_, k_;
};

class Relu final : public Layer {
 public:
  std::string kind() const override { return "relu"; }
  Shape output_shape(const Shape& input) const override { return input; }
  void forward(const Tensor& input, Tensor& output) const override;
  void backward(const Tensor& input, const Tensor& output, const Tensor& grad_output, Tensor* grad_input,
                std::span<double> param_grad) const override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Relu>(*this); }
};

// 2x2 max pooling, stride 2. Ties go to the first element in scan order.
class MaxPool2 final : public Layer {
 public:
  std::string kind() const override { return "maxpool"; }
  Shape output_shape(const Shape& input) const override;
  void forward(const Tensor& input, Tensor& output) const override;
  void backward(const Tensor& input, const Tensor& output, const Tensor& grad_output, Tensor* grad_input,
                std::span<double> param_grad) const override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<MaxPool2>(*this); }
};

// Fully connected over the flattened input. Weight layout [out][in], then bias.
class Linear final : public Layer {
 public:
  Linear(std::size_t in_features, std::size_t out_features);

  std::string kind() const override { return "linear"; }
  Shape output_shape(const Shape& input) const override;
  void forward(const Tensor& input, Tensor& output) const override;
  void backward(const Tensor& input, const Tensor& output, const Tensor& grad_output, Tensor* grad_input,
                std::span<double> param_grad) const override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Linear>(*this); }

  std::size_t in_features() const { return in_; }
  std::size_t out_features() const { return out_; }

 private:
  std::size_t in_, out_;
};

}  // namespace drt::models
