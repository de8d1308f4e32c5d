#include "drt/attack/dispersion.hpp"

#include <cmath>

#include "drt/errors.hpp"

namespace drt::attack {

namespace {

struct Moments {
  double mean;
  double std;
};

Moments sample_moments(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n < 2) throw DegenerateFeature("dispersion needs at least 2 elements, got " + std::to_string(n));
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(n - 1))};
}

}  // namespace

double dispersion(std::span<const double> values) { return sample_moments(values).std; }

double dispersion(const FeatureMap& fm) { return dispersion(fm.values.values()); }

double dispersion_with_gradient(std::span<const double> values, std::span<double> grad) {
  if (grad.size() != values.size()) throw ShapeMismatch("gradient buffer size mismatch");
  const auto [mean, s] = sample_moments(values);
  if (s == 0.0) {
    std::fill(grad.begin(), grad.end(), 0.0);
    return 0.0;
  }
  const double scale = 1.0 / (static_cast<double>(values.size() - 1) * s);
  for (std::size_t i = 0; i < values.size(); ++i) grad[i] = (values[i] - mean) * scale;
  return s;
}

}  // namespace drt::attack
