#include "drt/eval/sweeps.hpp"

#include <cmath>
#include <map>

#include "drt/attack/dispersion.hpp"
#include "drt/errors.hpp"

namespace drt::eval {

namespace {

void check_context(const SweepContext& ctx) {
  if (!ctx.source) throw InvalidConfig("source_model", "sweep needs a source model");
  if (ctx.clean.empty()) throw DatasetEmpty("sweep needs at least one image");
}

}  // namespace

StepSweep sweep_steps(const SweepContext& ctx, std::span<const attack::AttackKind> attacks,
                      std::span<const int> n_values, const attack::AttackConfig& base) {
  check_context(ctx);
  StepSweep sweep;
  sweep.report.notes.push_back("relative metrics in percent; benign predictions of each target are the reference");
  sweep.report.notes.push_back("detection scored as mAP at IoU 0.5");
  std::map<std::pair<std::string, std::string>, std::vector<double>> curves;
  for (const auto kind : attacks) {
    for (const int n : n_values) {
      attack::AttackConfig cfg = base;
      cfg.steps = n;
      const auto result = attack::run_attack(kind, ctx.clean, ctx.labels, *ctx.source, cfg, ctx.workers);
      for (const auto* target : ctx.targets) {
        auto row = make_row(ctx.source->name(), std::string(attack::to_string(kind)),
                            relative_eval(*target, ctx.clean, result.adversarial, ctx.eval_options));
        row.steps = n;
        curves[{row.attack, row.target}].push_back(row.adv_value);
        sweep.report.rows.push_back(std::move(row));
      }
    }
  }
  for (const auto& [key, values] : curves) {
    StepSweep::Trend trend{key.first, key.second, true};
    for (std::size_t i = 1; i < values.size(); ++i) {
      if (values[i] > values[i - 1]) trend.non_increasing = false;
    }
    sweep.trends.push_back(trend);
  }
  return sweep;
}

EvalReport sweep_layers(const SweepContext& ctx, std::span<const std::string> layer_keys,
                        const attack::AttackConfig& base, const models::LayerProfile* profile) {
  check_context(ctx);
  EvalReport report;
  report.notes.push_back("relative metrics in percent; benign predictions of each target are the reference");
  report.notes.push_back("detection scored as mAP at IoU 0.5");
  for (const auto& layer : layer_keys) {
    attack::AttackConfig cfg = base;
    cfg.target_layer = layer;
    const auto result = attack::dr_attack(ctx.clean, *ctx.source, cfg, ctx.workers);

    std::optional<double> delta;
    if (profile) {
      for (const auto& r : profile->rows) {
        if (r.layer == layer) delta = r.delta;
      }
    }
    if (!delta) {
      double before = 0.0, after = 0.0;
      for (std::size_t i = 0; i < result.traces.size(); ++i) {
        before += result.traces[i].records.front().objective;
        after += result.converged_objective[i];
      }
      delta = (before - after) / static_cast<double>(result.traces.size());
    }
    for (const auto* target : ctx.targets) {
      auto row = make_row(ctx.source->name(), "dr", relative_eval(*target, ctx.clean, result.adversarial, ctx.eval_options));
      row.layer = layer;
      row.std_delta = delta;
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

}  // namespace drt::eval
