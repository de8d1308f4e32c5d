#include "drt/attack/config.hpp"

#include <cmath>

#include "drt/errors.hpp"

namespace drt::attack {

std::string_view to_string(OptimizerMode mode) {
  switch (mode) {
    case OptimizerMode::sign_step: return "sign_step";
    case OptimizerMode::raw_gradient: return "raw_gradient";
    case OptimizerMode::adaptive_moment: return "adaptive_moment";
  }
  return "?";
}

OptimizerMode optimizer_mode_from_string(std::string_view name) {
  if (name == "sign_step") return OptimizerMode::sign_step;
  if (name == "raw_gradient") return OptimizerMode::raw_gradient;
  if (name == "adaptive_moment") return OptimizerMode::adaptive_moment;
  throw InvalidConfig("optimizer_mode", "unknown mode '" + std::string(name) +
                                            "' (expected sign_step, raw_gradient or adaptive_moment)");
}

void AttackConfig::validate() const {
  // epsilon == 0 and alpha == 0 are accepted: both make an attack the identity.
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw InvalidConfig("epsilon", "must be >= 0");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InvalidConfig("alpha", "must be >= 0");
  if (epsilon > 0.0 && alpha > 2.0 * epsilon) throw InvalidConfig("alpha", "must not exceed 2 * epsilon");
  if (steps < 1) throw InvalidConfig("steps", "must be >= 1");
  if (!(transform_prob >= 0.0 && transform_prob <= 1.0)) throw InvalidConfig("transform_prob", "must lie in [0, 1]");
  if (ti_kernel_size < 1 || ti_kernel_size % 2 == 0) throw InvalidConfig("ti_kernel_size", "must be a positive odd integer");
  if (!(momentum >= 0.0)) throw InvalidConfig("momentum", "must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw InvalidConfig("beta1", "must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw InvalidConfig("beta2", "must lie in [0, 1)");
  if (!(learning_rate > 0.0)) throw InvalidConfig("learning_rate", "must be > 0");
  if (!(resize_min > 0.0 && resize_min <= resize_max && resize_max <= 1.0)) {
    throw InvalidConfig("resize_min", "resize range must satisfy 0 < resize_min <= resize_max <= 1");
  }
}

}  // namespace drt::attack
