#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "drt/attack/attacks.hpp"
#include "drt/eval/relative.hpp"
#include "drt/models/profiler.hpp"

namespace drt::eval {

struct SweepContext {
  const models::SurrogateModel* source = nullptr;
  ImageBatch clean;
  std::vector<int> labels;  // used by the loss-driven attacks
  std::vector<const targets::TargetAdapter*> targets;
  RelativeEvalOptions eval_options;
  std::size_t workers = 1;
};

struct StepSweep {
  EvalReport report;
  // Per (attack, target): whether the metric never increases with N.
  struct Trend {
    std::string attack;
    std::string target;
    bool non_increasing = true;
  };
  std::vector<Trend> trends;
};

// One relative evaluation per (attack, N, target). All attacks share
// base.epsilon.
StepSweep sweep_steps(const SweepContext& ctx, std::span<const attack::AttackKind> attacks,
                      std::span<const int> n_values, const attack::AttackConfig& base);

// Dispersion reduction aimed at each layer in turn, evaluated on every
// target; each row carries the std delta of its layer, joined from profile
// when given (computed from the attack otherwise).
EvalReport sweep_layers(const SweepContext& ctx, std::span<const std::string> layer_keys,
                        const attack::AttackConfig& base, const models::LayerProfile* profile = nullptr);

}  // namespace drt::eval
