#pragma once

#include <span>
#include <vector>

#include "drt/attack/config.hpp"
#include "drt/attack/trace.hpp"
#include "drt/models/surrogate.hpp"

namespace drt::attack {

// Dispersion reduction: minimizes the sample standard deviation of the
// feature map at cfg.target_layer. Needs no label.
AttackResult dr_attack(const ImageBatch& x, const models::SurrogateModel& model,
                       const AttackConfig& cfg, std::size_t workers = 1);

// Iterative signed-gradient ascent on the classification loss.
AttackResult pgd_attack(const ImageBatch& x, std::span<const int> labels,
                        const models::SurrogateModel& model, const AttackConfig& cfg,
                        std::size_t workers = 1);

// Momentum iterative FGSM with L1-normalized gradient accumulation.
AttackResult mi_fgsm_attack(const ImageBatch& x, std::span<const int> labels,
                            const models::SurrogateModel& model, const AttackConfig& cfg,
                            std::size_t workers = 1);

// MI-FGSM with the resize-pad input diversity transform applied with
// probability cfg.transform_prob.
AttackResult dim_attack(const ImageBatch& x, std::span<const int> labels,
                        const models::SurrogateModel& model, const AttackConfig& cfg,
                        std::size_t workers = 1);

// DIM with the input gradient smoothed by a Gaussian kernel.
AttackResult ti_dim_attack(const ImageBatch& x, std::span<const int> labels,
                           const models::SurrogateModel& model, const AttackConfig& cfg,
                           std::size_t workers = 1);

// Divides grad by its L1 norm in place and returns the norm. A zero vector
// is left untouched.
double l1_normalize(std::span<double> grad);

enum class AttackKind { dr, pgd, mifgsm, dim, tidim };

std::string_view to_string(AttackKind kind);
AttackKind attack_kind_from_string(std::string_view name);

// Dispatch by kind. labels are ignored for dr.
AttackResult run_attack(AttackKind kind, const ImageBatch& x, std::span<const int> labels,
                        const models::SurrogateModel& model, const AttackConfig& cfg,
                        std::size_t workers = 1);

}  // namespace drt::attack
