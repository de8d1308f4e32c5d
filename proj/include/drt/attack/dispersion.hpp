#pragma once

#include <span>

#include "drt/tensor.hpp"

namespace drt::attack {

// Sample standard deviation (n - 1 denominator) over every element of the
// flattened feature map. Throws DegenerateFeature when fewer than two
// elements are given. A constant map yields 0.
double dispersion(std::span<const double> values);
double dispersion(const FeatureMap& fm);

// Writes d(dispersion)/d(values) into grad and returns the dispersion.
// grad_i = (v_i - mean) / ((n - 1) * std). At zero spread the gradient is
// defined as zero.
double dispersion_with_gradient(std::span<const double> values, std::span<double> grad);

}  // namespace drt::attack
