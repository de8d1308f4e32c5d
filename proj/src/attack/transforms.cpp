#include "drt/attack/transforms.hpp"

#include <cmath>

#include "drt/errors.hpp"

namespace drt::attack {

bool ResizePad::is_identity(const Shape& image_shape) const {
  return size_h == image_shape[1] && size_w == image_shape[2] && top == 0 && left == 0;
}

Tensor ResizePad::apply(const Tensor& image) const {
  const std::size_t c = image.dim(0), h = image.dim(1), w = image.dim(2);
  if (size_h > h || size_w > w || top + size_h > h || left + size_w > w) {
    throw ShapeMismatch("resize-pad geometry exceeds the canvas");
  }
  Tensor out(image.shape);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < size_h; ++y) {
      const std::size_t sy = y * h / size_h;
      for (std::size_t x = 0; x < size_w; ++x) {
        const std::size_t sx = x * w / size_w;
        out[(ch * h + top + y) * w + left + x] = image[(ch * h + sy) * w + sx];
      }
    }
  }
  return out;
}

Tensor ResizePad::backward(const Tensor& grad_out, const Shape& image_shape) const {
  const std::size_t c = image_shape[0], h = image_shape[1], w = image_shape[2];
  Tensor grad(image_shape);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < size_h; ++y) {
      const std::size_t sy = y * h / size_h;
      for (std::size_t x = 0; x < size_w; ++x) {
        const std::size_t sx = x * w / size_w;
        grad[(ch * h + sy) * w + sx] += grad_out[(ch * h + top + y) * w + left + x];
      }
    }
  }
  return grad;
}

double AttackRng::uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::size_t AttackRng::uniform_index(std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(engine_() % (hi - lo + 1));
}

std::optional<ResizePad> sample_resize_pad(AttackRng& rng, const Shape& image_shape, double p, double min_scale,
                                           double max_scale) {
  // Always consume the coin so the stream position does not depend on p.
  const double coin = rng.uniform01();
  if (!(coin < p)) return std::nullopt;
  const std::size_t h = image_shape[1], w = image_shape[2];
  const auto side_range = [&](std::size_t side) {
    const double s = static_cast<double>(side);
    std::size_t lo = static_cast<std::size_t>(std::ceil(min_scale * s - 1e-9));
    std::size_t hi = static_cast<std::size_t>(std::floor(max_scale * s + 1e-9));
    hi = std::clamp<std::size_t>(hi, 1, side);
    lo = std::clamp<std::size_t>(lo, 1, hi);
    return std::pair{lo, hi};
  };
  ResizePad t;
  const auto [lo, hi] = side_range(h);
  t.size_h = rng.uniform_index(lo, hi);
  t.size_w = h == w ? t.size_h : std::clamp<std::size_t>(std::lround(static_cast<double>(t.size_h * w) / h), 1, w);
  t.top = rng.uniform_index(0, h - t.size_h);
  t.left = rng.uniform_index(0, w - t.size_w);
  return t;
}

std::vector<double> gaussian_kernel(int size) {
  if (size < 1 || size % 2 == 0) throw InvalidConfig("ti_kernel_size", "must be a positive odd integer");
  const int r = size / 2;
  const double sigma = static_cast<double>(size) / 6.0;
  std::vector<double> k(static_cast<std::size_t>(size * size));
  double total = 0.0;
  for (int y = -r; y <= r; ++y) {
    for (int x = -r; x <= r; ++x) {
      const double v = std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
      k[static_cast<std::size_t>((y + r) * size + x + r)] = v;
      total += v;
    }
  }
  for (auto& v : k) v /= total;
  return k;
}

Tensor convolve_same(const Tensor& image, const std::vector<double>& kernel, int size) {
  if (kernel.size() != static_cast<std::size_t>(size * size)) throw ShapeMismatch("kernel size mismatch");
  const long c = static_cast<long>(image.dim(0)), h = static_cast<long>(image.dim(1)),
             w = static_cast<long>(image.dim(2));
  const long r = size / 2;
  Tensor out(image.shape);
  for (long ch = 0; ch < c; ++ch) {
    const double* in = image.data.data() + ch * h * w;
    double* o = out.data.data() + ch * h * w;
    for (long ky = 0; ky < size; ++ky) {
      const long dy = ky - r;
      const long y0 = std::max(0L, -dy), y1 = std::min(h, h - dy);
      for (long kx = 0; kx < size; ++kx) {
        const double kv = kernel[static_cast<std::size_t>(ky * size + kx)];
        const long dx = kx - r;
        const long x0 = std::max(0L, -dx), x1 = std::min(w, w - dx);
        for (long y = y0; y < y1; ++y) {
          const double* irow = in + (y + dy) * w + dx;
          double* orow = o + y * w;
          for (long x = x0; x < x1; ++x) orow[x] += kv * irow[x];
        }
      }
    }
  }
  return out;
}

}  // namespace drt::attack
