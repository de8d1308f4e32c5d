#include "drt/attack/attacks.hpp"

#include <cmath>

#include "drt/attack/dispersion.hpp"
#include "drt/attack/projection.hpp"
#include "drt/attack/transforms.hpp"
#include "drt/errors.hpp"
#include "drt/parallel.hpp"

namespace drt::attack {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

struct ImageOutcome {
  Tensor adversarial;
  ImageTrace trace;
  double converged = 0.0;
};

// Adam-style first/second moment state for the adaptive step mode.
struct MomentState {
  std::vector<double> m, v;
  int t = 0;
};

ImageOutcome dispersion_reduction(const Tensor& x, const std::string& id, const models::SurrogateModel& model,
                                  const AttackConfig& cfg) {
  const models::FeatureObjective objective = dispersion_with_gradient;
  Tensor x_adv = x;
  Tensor grad;
  ImageOutcome out;
  out.trace.id = id;

  double value = model.feature_objective(x_adv, cfg.target_layer, objective, grad);
  out.trace.records.push_back({0, value, 0.0});
  Tensor best = x_adv;
  double best_value = value;

  MomentState adam;
  if (cfg.optimizer_mode == OptimizerMode::adaptive_moment) {
    adam.m.assign(x.size(), 0.0);
    adam.v.assign(x.size(), 0.0);
  }

  for (int t = 1; t <= cfg.steps; ++t) {
    switch (cfg.optimizer_mode) {
      case OptimizerMode::sign_step:
        for (std::size_t i = 0; i < x_adv.size(); ++i) x_adv[i] -= cfg.alpha * sign(grad[i]);
        break;
      case OptimizerMode::raw_gradient:
        for (std::size_t i = 0; i < x_adv.size(); ++i) x_adv[i] -= cfg.alpha * grad[i];
        break;
      case OptimizerMode::adaptive_moment: {
        ++adam.t;
        const double c1 = 1.0 - std::pow(cfg.beta1, adam.t);
        const double c2 = 1.0 - std::pow(cfg.beta2, adam.t);
        for (std::size_t i = 0; i < x_adv.size(); ++i) {
          adam.m[i] = cfg.beta1 * adam.m[i] + (1.0 - cfg.beta1) * grad[i];
          adam.v[i] = cfg.beta2 * adam.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
          x_adv[i] -= cfg.learning_rate * (adam.m[i] / c1) / (std::sqrt(adam.v[i] / c2) + cfg.adam_eps);
        }
        break;
      }
    }
    project_inplace(x_adv.values(), x.values(), cfg.epsilon);
    value = model.feature_objective(x_adv, cfg.target_layer, objective, grad);
    out.trace.records.push_back({t, value, linf_distance(x_adv.values(), x.values())});
    if (value < best_value) {
      best_value = value;
      best = x_adv;
      out.trace.best_iteration = t;
    }
  }

  if (cfg.keep_best) {
    out.adversarial = std::move(best);
    out.converged = best_value;
  } else {
    out.adversarial = std::move(x_adv);
    out.converged = value;
    out.trace.best_iteration = cfg.steps;
  }
  return out;
}

double loss_only(const models::SurrogateModel& model, const Tensor& image, int label) {
  const Tensor logits = model.forward(image).logits;
  std::vector<double> scratch(logits.size());
  return models::softmax_cross_entropy(logits.values(), label, scratch);
}

struct LossAttackVariant {
  bool momentum = false;
  bool diversity = false;
  bool smoothing = false;
};

ImageOutcome loss_ascent(const Tensor& x, const std::string& id, int label, std::uint64_t seed,
                         const models::SurrogateModel& model, const AttackConfig& cfg, LossAttackVariant variant) {
  if (label < 0 || static_cast<std::size_t>(label) >= model.num_classes()) {
    throw InvalidLabel("label " + std::to_string(label) + " for image '" + id + "' outside the model's " +
                       std::to_string(model.num_classes()) + " classes");
  }
  AttackRng rng(seed);
  std::vector<double> kernel;
  if (variant.smoothing) kernel = gaussian_kernel(cfg.ti_kernel_size);

  Tensor x_adv = x;
  Tensor grad;
  std::vector<double> accum(x.size(), 0.0);
  ImageOutcome out;
  out.trace.id = id;
  double current_loss = 0.0;

  for (int t = 0; t < cfg.steps; ++t) {
    std::optional<ResizePad> transform;
    if (variant.diversity) {
      transform = sample_resize_pad(rng, x.shape, cfg.transform_prob, cfg.resize_min, cfg.resize_max);
      if (transform && transform->is_identity(x.shape)) transform.reset();
    }
    if (transform) {
      Tensor grad_t;
      model.classification_loss(transform->apply(x_adv), label, grad_t);
      grad = transform->backward(grad_t, x.shape);
      current_loss = loss_only(model, x_adv, label);
    } else {
      current_loss = model.classification_loss(x_adv, label, grad);
    }
    out.trace.records.push_back({t, current_loss, linf_distance(x_adv.values(), x.values())});

    if (variant.smoothing) grad = convolve_same(grad, kernel, cfg.ti_kernel_size);

    if (variant.momentum) {
      l1_normalize(grad.values());
      for (std::size_t i = 0; i < accum.size(); ++i) accum[i] = cfg.momentum * accum[i] + grad[i];
      for (std::size_t i = 0; i < x_adv.size(); ++i) x_adv[i] += cfg.alpha * sign(accum[i]);
    } else {
      for (std::size_t i = 0; i < x_adv.size(); ++i) x_adv[i] += cfg.alpha * sign(grad[i]);
    }
    project_inplace(x_adv.values(), x.values(), cfg.epsilon);
  }
  current_loss = loss_only(model, x_adv, label);
  out.trace.records.push_back({cfg.steps, current_loss, linf_distance(x_adv.values(), x.values())});
  out.trace.best_iteration = cfg.steps;
  out.adversarial = std::move(x_adv);
  out.converged = current_loss;
  return out;
}

AttackResult assemble(const ImageBatch& x, std::vector<ImageOutcome>& outcomes) {
  AttackResult result;
  std::vector<Tensor> images;
  images.reserve(outcomes.size());
  for (auto& o : outcomes) {
    images.push_back(std::move(o.adversarial));
    result.traces.push_back(std::move(o.trace));
    result.converged_objective.push_back(o.converged);
  }
  result.adversarial = images.empty() ? ImageBatch(Tensor(x.shape()), {}) : ImageBatch(images, x.ids());
  return result;
}

AttackResult run_loss_attack(const ImageBatch& x, std::span<const int> labels, const models::SurrogateModel& model,
                             const AttackConfig& cfg, LossAttackVariant variant, std::size_t workers) {
  cfg.validate();
  if (labels.size() != x.size()) {
    throw InvalidLabel("expected " + std::to_string(x.size()) + " labels, got " + std::to_string(labels.size()));
  }
  std::vector<ImageOutcome> outcomes(x.size());
  parallel_for(
      x.size(),
      [&](std::size_t i) {
        outcomes[i] = loss_ascent(x.image(i), x.id(i), labels[i], cfg.rng_seed + i, model, cfg, variant);
      },
      workers);
  return assemble(x, outcomes);
}

}  // namespace

double l1_normalize(std::span<double> grad) {
  double l1 = 0.0;
  for (double g : grad) l1 += std::abs(g);
  // A zero gradient is left as is and adds nothing to the momentum.
  if (l1 > 0.0) {
    for (auto& g : grad) g /= l1;
  }
  return l1;
}

AttackResult dr_attack(const ImageBatch& x, const models::SurrogateModel& model, const AttackConfig& cfg,
                       std::size_t workers) {
  cfg.validate();
  model.require_layer(cfg.target_layer);
  std::vector<ImageOutcome> outcomes(x.size());
  parallel_for(
      x.size(), [&](std::size_t i) { outcomes[i] = dispersion_reduction(x.image(i), x.id(i), model, cfg); }, workers);
  return assemble(x, outcomes);
}

AttackResult pgd_attack(const ImageBatch& x, std::span<const int> labels, const models::SurrogateModel& model,
                        const AttackConfig& cfg, std::size_t workers) {
  return run_loss_attack(x, labels, model, cfg, {}, workers);
}

AttackResult mi_fgsm_attack(const ImageBatch& x, std::span<const int> labels, const models::SurrogateModel& model,
                            const AttackConfig& cfg, std::size_t workers) {
  return run_loss_attack(x, labels, model, cfg, {.momentum = true}, workers);
}

AttackResult dim_attack(const ImageBatch& x, std::span<const int> labels, const models::SurrogateModel& model,
                        const AttackConfig& cfg, std::size_t workers) {
  return run_loss_attack(x, labels, model, cfg, {.momentum = true, .diversity = true}, workers);
}

AttackResult ti_dim_attack(const ImageBatch& x, std::span<const int> labels, const models::SurrogateModel& model,
                           const AttackConfig& cfg, std::size_t workers) {
  return run_loss_attack(x, labels, model, cfg, {.momentum = true, .diversity = true, .smoothing = true}, workers);
}

std::string_view to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::dr: return "dr";
    case AttackKind::pgd: return "pgd";
    case AttackKind::mifgsm: return "mifgsm";
    case AttackKind::dim: return "dim";
    case AttackKind::tidim: return "tidim";
  }
  return "?";
}

AttackKind attack_kind_from_string(std::string_view name) {
  if (name == "dr") return AttackKind::dr;
  if (name == "pgd") return AttackKind::pgd;
  if (name == "mifgsm") return AttackKind::mifgsm;
  if (name == "dim") return AttackKind::dim;
  if (name == "tidim") return AttackKind::tidim;
  throw InvalidConfig("attack", "unknown attack '" + std::string(name) + "' (expected dr, pgd, mifgsm, dim or tidim)");
}

AttackResult run_attack(AttackKind kind, const ImageBatch& x, std::span<const int> labels,
                        const models::SurrogateModel& model, const AttackConfig& cfg, std::size_t workers) {
  switch (kind) {
    case AttackKind::dr: return dr_attack(x, model, cfg, workers);
    case AttackKind::pgd: return pgd_attack(x, labels, model, cfg, workers);
    case AttackKind::mifgsm: return mi_fgsm_attack(x, labels, model, cfg, workers);
    case AttackKind::dim: return dim_attack(x, labels, model, cfg, workers);
    case AttackKind::tidim: return ti_dim_attack(x, labels, model, cfg, workers);
  }
  throw InvalidConfig("attack", "unhandled attack kind");
}

}  // namespace drt::attack
