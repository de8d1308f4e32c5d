#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "drt/eval/metrics.hpp"

namespace drt::eval {

// Minimal COCO-style subset: images [{id, file_name}], annotations
// [{image_id, bbox: [x, y, w, h], category_id, score}], categories
// [{id, name}]. Image ids are 1-based positions in image_names.
nlohmann::json to_coco(const DetectionSet& detections, const std::vector<std::string>& image_names,
                       const std::vector<std::string>& category_names);

struct CocoSet {
  std::vector<std::string> image_names;
  std::vector<std::string> category_names;
  DetectionSet detections;
};

// Annotations without a score are treated as references (score 1).
CocoSet from_coco(const nlohmann::json& doc);

}  // namespace drt::eval
