#include "drt/eval/relative.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "drt/errors.hpp"

namespace drt::eval {

std::string metric_name(targets::Task task) {
  switch (task) {
    case targets::Task::classify: return "accuracy";
    case targets::Task::detect: return "mAP@0.5";
    case targets::Task::segment: return "mIoU";
  }
  return "?";
}

RelativeScore relative_eval(const targets::TargetAdapter& target, const ImageBatch& clean, const ImageBatch& adv,
                            const RelativeEvalOptions& opts) {
  std::map<std::string, std::size_t> adv_index;
  for (std::size_t i = 0; i < adv.size(); ++i) adv_index.emplace(adv.id(i), i);

  RelativeScore score;
  score.target = target.identity();
  score.task = target.task();
  score.metric_name = metric_name(target.task());

  std::vector<targets::Prediction> refs, preds;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const auto it = adv_index.find(clean.id(i));
    if (it == adv_index.end()) throw ShapeMismatch("adversarial set has no image '" + clean.id(i) + "'");
    try {
      auto ref = target.invoke(clean.image(i));
      auto pred = target.invoke(adv.image(it->second));
      refs.push_back(std::move(ref));
      preds.push_back(std::move(pred));
    } catch (const TargetFailure&) {
      ++score.excluded;
      score.excluded_ids.push_back(clean.id(i));
    }
  }
  score.evaluated = refs.size();
  if (refs.empty()) {
    score.clean_value = score.adv_value = std::numeric_limits<double>::quiet_NaN();
    return score;
  }

  switch (target.task()) {
    case targets::Task::classify: {
      std::size_t same_adv = 0, same_clean = 0;
      for (std::size_t i = 0; i < refs.size(); ++i) {
        const int r = std::get<int>(refs[i]);
        same_clean += std::get<int>(refs[i]) == r;
        same_adv += std::get<int>(preds[i]) == r;
      }
      score.clean_value = 100.0 * static_cast<double>(same_clean) / static_cast<double>(refs.size());
      score.adv_value = 100.0 * static_cast<double>(same_adv) / static_cast<double>(refs.size());
      break;
    }
    case targets::Task::detect: {
      ApOptions ap = opts.ap;
      if (opts.classes) ap.classes = opts.classes;
      DetectionSet ref_set, clean_set, adv_set;
      for (std::size_t i = 0; i < refs.size(); ++i) {
        const auto& r = std::get<Detections>(refs[i]);
        Detections kept;
        for (const auto& d : r) {
          if (d.score >= ap.score_threshold) kept.push_back(d);
        }
        ref_set.push_back(std::move(kept));
        clean_set.push_back(r);
        adv_set.push_back(std::get<Detections>(preds[i]));
      }
      score.clean_value = 100.0 * average_precision(clean_set, ref_set, ap).mean_ap;
      score.adv_value = 100.0 * average_precision(adv_set, ref_set, ap).mean_ap;
      break;
    }
    case targets::Task::segment: {
      ConfusionMatrix clean_cm(target.label_map().size()), adv_cm(target.label_map().size());
      for (std::size_t i = 0; i < refs.size(); ++i) {
        const auto& r = std::get<SegmentationMask>(refs[i]);
        clean_cm.add(r, r);
        adv_cm.add(std::get<SegmentationMask>(preds[i]), r);
      }
      score.clean_value = 100.0 * clean_cm.mean_iou(opts.classes);
      score.adv_value = 100.0 * adv_cm.mean_iou(opts.classes);
      break;
    }
  }
  return score;
}

EvalRow make_row(const std::string& source_model, const std::string& attack, const RelativeScore& score) {
  EvalRow row;
  row.source_model = source_model;
  row.attack = attack;
  row.target = score.target;
  row.task = std::string(targets::to_string(score.task));
  row.metric_name = score.metric_name;
  row.clean_value = score.clean_value;
  row.adv_value = score.adv_value;
  row.evaluated = score.evaluated;
  row.excluded = score.excluded;
  return row;
}

}  // namespace drt::eval
