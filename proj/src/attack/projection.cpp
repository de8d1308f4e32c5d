#include "drt/attack/projection.hpp"

#include <algorithm>
#include <cmath>

#include "drt/errors.hpp"

namespace drt::attack {

void project_inplace(std::span<double> x_adv, std::span<const double> x_orig, double epsilon) {
  if (x_adv.size() != x_orig.size()) throw ShapeMismatch("projection operands differ in size");
  for (std::size_t i = 0; i < x_adv.size(); ++i) {
    const double lo = std::max(0.0, x_orig[i] - epsilon);
    const double hi = std::min(255.0, x_orig[i] + epsilon);
    x_adv[i] = std::clamp(x_adv[i], lo, hi);
  }
}

ImageBatch project(const ImageBatch& x_adv, const ImageBatch& x_orig, double epsilon) {
  if (x_adv.shape() != x_orig.shape()) {
    throw ShapeMismatch("projection shapes " + shape_string(x_adv.shape()) + " and " + shape_string(x_orig.shape()));
  }
  Tensor out = x_adv.tensor();
  project_inplace(out.values(), x_orig.tensor().values(), epsilon);
  return ImageBatch(std::move(out), x_adv.ids());
}

double linf_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeMismatch("linf operands differ in size");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void quantize_into_ball(std::span<double> x_adv, std::span<const double> x_orig, double epsilon) {
  if (x_adv.size() != x_orig.size()) throw ShapeMismatch("quantization operands differ in size");
  for (std::size_t i = 0; i < x_adv.size(); ++i) {
    const double lo = std::max(0.0, std::ceil(x_orig[i] - epsilon));
    const double hi = std::min(255.0, std::floor(x_orig[i] + epsilon));
    // nearbyint follows the default FE_TONEAREST mode: ties go to even.
    x_adv[i] = std::clamp(std::nearbyint(x_adv[i]), lo, hi);
  }
}

}  // namespace drt::attack
