#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace drt::attack {

enum class OptimizerMode { sign_step, raw_gradient, adaptive_moment };

std::string_view to_string(OptimizerMode mode);
OptimizerMode optimizer_mode_from_string(std::string_view name);

// Hyperparameters shared by dispersion reduction and the baseline attacks.
// All distances are in pixel units on the [0, 255] scale.
struct AttackConfig {
  double epsilon = 16.0;
  double alpha = 4.0;
  int steps = 100;
  double momentum = 1.0;
  double transform_prob = 0.5;
  int ti_kernel_size = 15;
  OptimizerMode optimizer_mode = OptimizerMode::sign_step;
  double beta1 = 0.98;
  double beta2 = 0.99;
  double learning_rate = 5e-2;
  double adam_eps = 1e-8;
  std::string target_layer;
  std::uint64_t rng_seed = 0;

  // Input-diversity resize range, as a fraction of the input side.
  double resize_min = 0.9;
  double resize_max = 1.0;

  // Keep the lowest-objective iterate for dispersion reduction.
  bool keep_best = true;

  // Throws InvalidConfig naming the offending field.
  void validate() const;
};

}  // namespace drt::attack
