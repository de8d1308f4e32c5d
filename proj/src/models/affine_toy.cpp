#include "drt/models/affine_toy.hpp"

#include <cmath>

#include "drt/attack/dispersion.hpp"
#include "drt/errors.hpp"

namespace drt::models {

std::vector<double> AffineToyModel::features(std::span<const double> x) const {
  if (x.size() != num_features) throw ShapeMismatch("toy input has the wrong size");
  std::vector<double> a(x.begin(), x.end());
  if (extractor == ToyExtractor::tanh) {
    for (auto& v : a) v = std::tanh(v);
  }
  return a;
}

std::vector<double> AffineToyModel::logits_of_features(std::span<const double> a) const {
  if (weights.size() != num_classes * num_features) throw ShapeMismatch("toy weight matrix has the wrong size");
  std::vector<double> y(num_classes, 0.0);
  for (std::size_t c = 0; c < num_classes; ++c) {
    for (std::size_t i = 0; i < num_features; ++i) y[c] += weights[c * num_features + i] * a[i];
  }
  return y;
}

std::span<const double> AffineToyModel::row(std::size_t c) const {
  if (c >= num_classes) throw InvalidLabel("class " + std::to_string(c) + " out of range");
  return std::span<const double>(weights).subspan(c * num_features, num_features);
}

double sample_covariance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw ShapeMismatch("covariance operands differ in size");
  const std::size_t n = u.size();
  if (n < 2) throw DegenerateFeature("covariance needs at least 2 samples");
  double mu = 0.0, mv = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mu += u[i];
    mv += v[i];
  }
  mu /= static_cast<double>(n);
  mv /= static_cast<double>(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += (u[i] - mu) * (v[i] - mv);
  return acc / static_cast<double>(n - 1);
}

std::vector<double> std_descent_step(std::span<const double> a, double alpha) {
  const double s = attack::dispersion(a);
  if (s == 0.0) throw ZeroVariance("feature vector has zero standard deviation");
  const std::size_t n = a.size();
  double mean = 0.0;
  for (double v : a) mean += v;
  mean /= static_cast<double>(n);
  const double scale = 2.0 * alpha / (std::sqrt(static_cast<double>(n - 1)) * s);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - scale * (a[i] - mean);
  return out;
}

double predict_logit_change(const AffineToyModel& toy, std::span<const double> x, std::size_t c, double alpha) {
  const auto a = toy.features(x);
  const double s = attack::dispersion(a);
  if (s == 0.0) throw ZeroVariance("feature vector has zero standard deviation");
  const double n = static_cast<double>(a.size());
  return -2.0 * alpha * std::sqrt(n - 1.0) * sample_covariance(toy.row(c), a) / s;
}

LogitChangeReport verify_logit_change(const AffineToyModel& toy, std::span<const double> x, std::size_t c,
                                      double alpha) {
  LogitChangeReport r;
  const auto a = toy.features(x);
  r.predicted = predict_logit_change(toy, x, c, alpha);
  r.covariance = sample_covariance(toy.row(c), a);
  const auto moved = std_descent_step(a, alpha);
  r.actual = toy.logits_of_features(moved)[c] - toy.logits_of_features(a)[c];
  r.abs_error = std::abs(r.predicted - r.actual);
  return r;
}

}  // namespace drt::models
