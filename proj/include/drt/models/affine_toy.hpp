#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace drt::models {

enum class ToyExtractor { identity, tanh };

// Feature extractor a = f(x) followed by logits y = W a (no bias). W is
// stored row-major with one row w_c per class.
struct AffineToyModel {
  std::size_t num_classes = 0;
  std::size_t num_features = 0;
  std::vector<double> weights;
  ToyExtractor extractor = ToyExtractor::identity;

  std::vector<double> features(std::span<const double> x) const;
  std::vector<double> logits_of_features(std::span<const double> a) const;
  std::span<const double> row(std::size_t c) const;
};

// Paired-sample covariance with n - 1 denominator.
double sample_covariance(std::span<const double> u, std::span<const double> v);

// First-order step on a that reduces its sample std with magnitude alpha:
// a' = a - 2 alpha (a - mean) / (sqrt(n - 1) std). Throws ZeroVariance.
std::vector<double> std_descent_step(std::span<const double> a, double alpha);

// Predicted change of logit c under std_descent_step:
// -2 alpha sqrt(n - 1) cov(w_c, a) / std(a). Throws ZeroVariance.
double predict_logit_change(const AffineToyModel& toy, std::span<const double> x, std::size_t c, double alpha);

struct LogitChangeReport {
  double predicted = 0.0;
  double actual = 0.0;
  double abs_error = 0.0;
  double covariance = 0.0;
};

// Applies std_descent_step to the features of x and measures the logit
// change through the affine head.
LogitChangeReport verify_logit_change(const AffineToyModel& toy, std::span<const double> x, std::size_t c,
                                      double alpha);

}  // namespace drt::models
