#include "drt/models/layers.hpp"

#include <algorithm>
#include <cassert>

#include "drt/errors.hpp"

namespace drt::models {

namespace {

void require_rank3(const Shape& s, const char* who) {
  if (s.size() != 3) throw ShapeMismatch(std::string(who) + " expects (C, H, W), got " + shape_string(s));
}

}  // namespace

void PixelNormalize::forward(const Tensor& input, Tensor& output) const {
  output.shape = input.shape;
  output.data.resize(input.size());
  for (std::size_t i = 0; i < input.size(); ++i) output[i] = input[i] * (1.0 / 255.0) - 0.5;
}

void PixelNormalize::backward(const Tensor&, const Tensor&, const Tensor& grad_output, Tensor* grad_input,
                              std::span<double>) const {
  if (!grad_input) return;
  grad_input->shape = grad_output.shape;
  grad_input->data.resize(grad_output.size());
  for (std::size_t i = 0; i < grad_output.size(); ++i) (*grad_input)[i] = grad_output[i] * (1.0 / 255.0);
}

Conv2d::Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel)
    : in_(in_channels), out_(out_channels), k_(kernel) {
  if (kernel % 2 == 0) throw ShapeMismatch("conv kernel must be odd");
  params_.assign(weight_count() + out_, 0.0);
}

Shape Conv2d::output_shape(const Shape& input) const {
  require_rank3(input, "conv");
  if (input[0] != in_) throw ShapeMismatch("conv expects " + std::to_string(in_) + " input channels");
  return {out_, input[1], input[2]};
}

// The three loops below share one traversal: for every (out, in, ky, kx) the
// valid output rows/cols are those whose shifted input coordinate stays in
// range; the innermost loop walks a contiguous row.
void Conv2d::forward(const Tensor& input, Tensor& output) const {
  const Shape os = output_shape(input.shape);
  const std::size_t h = os[1], w = os[2], plane = h * w;
  const long pad = static_cast<long>(k_ / 2);
  output.shape = os;
  output.data.assign(out_ * plane, 0.0);
  const double* weights = params_.data();
  const double* bias = params_.data() + weight_count();
  for (std::size_t co = 0; co < out_; ++co) {
    double* out = output.data.data() + co * plane;
    std::fill(out, out + plane, bias[co]);
    for (std::size_t ci = 0; ci < in_; ++ci) {
      const double* in = input.data.data() + ci * plane;
      for (std::size_t ky = 0; ky < k_; ++ky) {
        const long dy = static_cast<long>(ky) - pad;
        const long y0 = std::max(0L, -dy), y1 = std::min<long>(h, static_cast<long>(h) - dy);
        for (std::size_t kx = 0; kx < k_; ++kx) {
          const double wv = weights[((co * in_ + ci) * k_ + ky) * k_ + kx];
          const long dx = static_cast<long>(kx) - pad;
          const long x0 = std::max(0L, -dx), x1 = std::min<long>(w, static_cast<long>(w) - dx);
          for (long y = y0; y < y1; ++y) {
            double* orow = out + y * w;
            const double* irow = in + (y + dy) * static_cast<long>(w) + dx;
            for (long x = x0; x < x1; ++x) orow[x] += wv * irow[x];
          }
        }
      }
    }
  }
}

void Conv2d::backward(const Tensor& input, const Tensor&, const Tensor& grad_output, Tensor* grad_input,
                      std::span<double> param_grad) const {
  const std::size_t h = input.dim(1), w = input.dim(2), plane = h * w;
  const long pad = static_cast<long>(k_ / 2);
  const double* weights = params_.data();
  if (grad_input) {
    grad_input->shape = input.shape;
    grad_input->data.assign(input.size(), 0.0);
  }
  const bool want_params = !param_grad.empty();
  for (std::size_t co = 0; co < out_; ++co) {
    const double* g = grad_output.data.data() + co * plane;
    if (want_params) {
      double acc = 0.0;
      for (std::size_t i = 0; i < plane; ++i) acc += g[i];
      param_grad[weight_count() + co] += acc;
    }
    for (std::size_t ci = 0; ci < in_; ++ci) {
      const double* in = input.data.data() + ci * plane;
      double* gin = grad_input ? grad_input->data.data() + ci * plane : nullptr;
      for (std::size_t ky = 0; ky < k_; ++ky) {
        const long dy = static_cast<long>(ky) - pad;
        const long y0 = std::max(0L, -dy), y1 = std::min<long>(h, static_cast<long>(h) - dy);
        for (std::size_t kx = 0; kx < k_; ++kx) {
          const std::size_t widx = ((co * in_ + ci) * k_ + ky) * k_ + kx;
          const double wv = weights[widx];
          const long dx = static_cast<long>(kx) - pad;
          const long x0 = std::max(0L, -dx), x1 = std::min<long>(w, static_cast<long>(w) - dx);
          double acc = 0.0;
          for (long y = y0; y < y1; ++y) {
            const double* grow = g + y * w;
            const long off = (y + dy) * static_cast<long>(w) + dx;
            if (gin) {
              double* girow = gin + off;
              for (long x = x0; x < x1; ++x) girow[x] += wv * grow[x];
            }
            if (want_params) {
              const double* irow = in + off;
              for (long x = x0; x < x1; ++x) acc += grow[x] * irow[x];
            }
          }
          if (want_params) param_grad[widx] += acc;
        }
      }
    }
  }
}

void Relu::forward(const Tensor& input, Tensor& output) const {
  output.shape = input.shape;
  output.data.resize(input.size());
  for (std::size_t i = 0; i < input.size(); ++i) output[i] = input[i] > 0.0 ? input[i] : 0.0;
}

void Relu::backward(const Tensor& input, const Tensor&, const Tensor& grad_output, Tensor* grad_input,
                    std::span<double>) const {
  if (!grad_input) return;
  grad_input->shape = input.shape;
  grad_input->data.resize(input.size());
  for (std::size_t i = 0; i < input.size(); ++i) (*grad_input)[i] = input[i] > 0.0 ? grad_output[i] : 0.0;
}

Shape MaxPool2::output_shape(const Shape& input) const {
  require_rank3(input, "maxpool");
  if (input[1] % 2 || input[2] % 2) throw ShapeMismatch("maxpool expects even spatial size");
  return {input[0], input[1] / 2, input[2] / 2};
}

void MaxPool2::forward(const Tensor& input, Tensor& output) const {
  const Shape os = output_shape(input.shape);
  output.shape = os;
  output.data.resize(shape_size(os));
  const std::size_t w = input.dim(2), oh = os[1], ow = os[2];
  for (std::size_t c = 0; c < os[0]; ++c) {
    const double* in = input.data.data() + c * input.dim(1) * w;
    double* out = output.data.data() + c * oh * ow;
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        const double* p = in + 2 * y * w + 2 * x;
        out[y * ow + x] = std::max(std::max(p[0], p[1]), std::max(p[w], p[w + 1]));
      }
    }
  }
}

void MaxPool2::backward(const Tensor& input, const Tensor&, const Tensor& grad_output, Tensor* grad_input,
                        std::span<double>) const {
  if (!grad_input) return;
  grad_input->shape = input.shape;
  grad_input->data.assign(input.size(), 0.0);
  const std::size_t w = input.dim(2), oh = input.dim(1) / 2, ow = w / 2;
  for (std::size_t c = 0; c < input.dim(0); ++c) {
    const std::size_t base = c * input.dim(1) * w;
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        const std::size_t cand[4] = {base + 2 * y * w + 2 * x, base + 2 * y * w + 2 * x + 1,
                                     base + (2 * y + 1) * w + 2 * x, base + (2 * y + 1) * w + 2 * x + 1};
        std::size_t best = cand[0];
        for (std::size_t k = 1; k < 4; ++k) {
          if (input[cand[k]] > input[best]) best = cand[k];
        }
        (*grad_input)[best] += grad_output[c * oh * ow + y * ow + x];
      }
    }
  }
}

Linear::Linear(std::size_t in_features, std::size_t out_features) : in_(in_features), out_(out_features) {
  params_.assign(in_ * out_ + out_, 0.0);
}

Shape Linear::output_shape(const Shape& input) const {
  if (shape_size(input) != in_) {
    throw ShapeMismatch("linear expects " + std::to_string(in_) + " inputs, got " + shape_string(input));
  }
  return {out_};
}

void Linear::forward(const Tensor& input, Tensor& output) const {
  output.shape = output_shape(input.shape);
  output.data.resize(out_);
  const double* wts = params_.data();
  for (std::size_t j = 0; j < out_; ++j) {
    double acc = params_[in_ * out_ + j];
    const double* row = wts + j * in_;
    for (std::size_t i = 0; i < in_; ++i) acc += row[i] * input[i];
    output[j] = acc;
  }
}

void Linear::backward(const Tensor& input, const Tensor&, const Tensor& grad_output, Tensor* grad_input,
                      std::span<double> param_grad) const {
  if (grad_input) {
    grad_input->shape = input.shape;
    grad_input->data.assign(in_, 0.0);
  }
  for (std::size_t j = 0; j < out_; ++j) {
    const double g = grad_output[j];
    const double* row = params_.data() + j * in_;
    if (grad_input) {
      for (std::size_t i = 0; i < in_; ++i) (*grad_input)[i] += g * row[i];
    }
    if (!param_grad.empty()) {
      double* prow = param_grad.data() + j * in_;
      for (std::size_t i = 0; i < in_; ++i) prow[i] += g * input[i];
      param_grad[in_ * out_ + j] += g;
    }
  }
}

}  // namespace drt::models
