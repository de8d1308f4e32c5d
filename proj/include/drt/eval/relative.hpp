#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "drt/eval/metrics.hpp"
#include "drt/targets/adapter.hpp"

namespace drt::eval {

struct RelativeEvalOptions {
  ApOptions ap;
  std::optional<std::set<int>> classes;
};

// Relative score of one target: the target's answers on the clean images
// are the reference. Values are percentages.
struct RelativeScore {
  std::string target;
  targets::Task task = targets::Task::classify;
  std::string metric_name;   // "accuracy", "mAP@0.5" or "mIoU"
  double clean_value = 0.0;  // clean scored against itself
  double adv_value = 0.0;
  std::size_t evaluated = 0;
  std::size_t excluded = 0;  // images where the target failed on either side
  std::vector<std::string> excluded_ids;
};

std::string metric_name(targets::Task task);

// clean and adv are paired by image id; every clean id must appear in adv.
RelativeScore relative_eval(const targets::TargetAdapter& target, const ImageBatch& clean, const ImageBatch& adv,
                            const RelativeEvalOptions& opts = {});

struct EvalRow {
  std::string source_model;
  std::string attack;
  std::string target;
  std::string task;
  std::string metric_name;
  double clean_value = 0.0;
  double adv_value = 0.0;
  std::size_t evaluated = 0;
  std::size_t excluded = 0;
  // Sweep coordinates; empty when not part of a sweep.
  std::optional<int> steps;
  std::optional<std::string> layer;
  std::optional<double> std_delta;
};

EvalRow make_row(const std::string& source_model, const std::string& attack, const RelativeScore& score);

struct EvalReport {
  std::vector<EvalRow> rows;
  // Notes carried into every report header.
  std::vector<std::string> notes;
};

}  // namespace drt::eval
