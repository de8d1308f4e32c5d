#pragma once

#include <span>

#include "drt/tensor.hpp"

namespace drt::attack {

// Clips x_adv into [x_orig - eps, x_orig + eps] intersected with [0, 255].
ImageBatch project(const ImageBatch& x_adv, const ImageBatch& x_orig, double epsilon);
void project_inplace(std::span<double> x_adv, std::span<const double> x_orig, double epsilon);

double linf_distance(std::span<const double> a, std::span<const double> b);

// Rounds to the 8-bit grid (half to even) and re-clips to the integer points
// of the budget ball, so a saved image satisfies the budget exactly.
void quantize_into_ball(std::span<double> x_adv, std::span<const double> x_orig, double epsilon);

}  // namespace drt::attack
