#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "drt/tensor.hpp"

namespace drt::attack {

// Resize-and-pad input diversity transform. The image (C, H, W) is resized
// with nearest-neighbour sampling to (size_h, size_w) and placed at
// (top, left) on a zero canvas of the original size.
struct ResizePad {
  std::size_t size_h = 0;
  std::size_t size_w = 0;
  std::size_t top = 0;
  std::size_t left = 0;

  bool is_identity(const Shape& image_shape) const;
  Tensor apply(const Tensor& image) const;
  // Adjoint of apply: maps a gradient on the transformed image back onto
  // the source image.
  Tensor backward(const Tensor& grad_out, const Shape& image_shape) const;
};

// Per-attack random stream. Draws are made with explicit integer arithmetic
// so trajectories do not depend on the standard library's distributions.
class AttackRng {
 public:
  explicit AttackRng(std::uint64_t seed) : engine_(seed) {}

  double uniform01();
  std::size_t uniform_index(std::size_t lo, std::size_t hi);  // inclusive

 private:
  std::mt19937_64 engine_;
};

// Fires with probability p; when it fires, draws a side length uniformly
// among the integers in [ceil(min_scale * side), floor(max_scale * side)]
// and a uniform placement.
std::optional<ResizePad> sample_resize_pad(AttackRng& rng, const Shape& image_shape, double p,
                                           double min_scale, double max_scale);

// Normalized square Gaussian kernel, sigma = size / 6. size must be odd.
std::vector<double> gaussian_kernel(int size);

// Per-channel 2-D convolution with a square kernel and zero padding, output
// the same size as the input. Input is (C, H, W).
Tensor convolve_same(const Tensor& image, const std::vector<double>& kernel, int size);

}  // namespace drt::attack
