#include "drt/eval/coco.hpp"

#include <map>

#include "drt/errors.hpp"

namespace drt::eval {

using nlohmann::json;

json to_coco(const DetectionSet& detections, const std::vector<std::string>& image_names,
             const std::vector<std::string>& category_names) {
  if (detections.size() != image_names.size()) throw ShapeMismatch("one detection list per image expected");
  json doc{{"images", json::array()}, {"annotations", json::array()}, {"categories", json::array()}};
  for (std::size_t c = 0; c < category_names.size(); ++c) {
    doc["categories"].push_back({{"id", c}, {"name", category_names[c]}});
  }
  std::size_t ann_id = 1;
  for (std::size_t i = 0; i < image_names.size(); ++i) {
    doc["images"].push_back({{"id", i + 1}, {"file_name", image_names[i]}});
    for (const auto& d : detections[i]) {
      doc["annotations"].push_back({{"id", ann_id++},
                                    {"image_id", i + 1},
                                    {"bbox", {d.box.x1, d.box.y1, d.box.x2 - d.box.x1, d.box.y2 - d.box.y1}},
                                    {"category_id", d.label},
                                    {"score", d.score}});
    }
  }
  return doc;
}

CocoSet from_coco(const json& doc) {
  CocoSet out;
  try {
    std::map<long long, std::size_t> image_pos;
    for (const auto& img : doc.at("images")) {
      image_pos[img.at("id").get<long long>()] = out.image_names.size();
      out.image_names.push_back(img.value("file_name", std::to_string(img.at("id").get<long long>())));
    }
    if (doc.contains("categories")) {
      for (const auto& c : doc.at("categories")) {
        const auto id = c.at("id").get<std::size_t>();
        if (out.category_names.size() <= id) out.category_names.resize(id + 1);
        out.category_names[id] = c.at("name").get<std::string>();
      }
    }
    out.detections.resize(out.image_names.size());
    for (const auto& a : doc.at("annotations")) {
      const auto it = image_pos.find(a.at("image_id").get<long long>());
      if (it == image_pos.end()) throw LoadFailure("annotation references an unknown image");
      const auto bbox = a.at("bbox").get<std::vector<double>>();
      if (bbox.size() != 4) throw InvalidBox("bbox must be [x, y, w, h]");
      Detection d{{bbox[0], bbox[1], bbox[0] + bbox[2], bbox[1] + bbox[3]},
                  a.at("category_id").get<int>(),
                  a.value("score", 1.0)};
      if (!d.box.valid()) throw InvalidBox("annotation box is degenerate");
      out.detections[it->second].push_back(d);
    }
  } catch (const json::exception& e) {
    throw LoadFailure(std::string("malformed COCO document: ") + e.what());
  }
  return out;
}

}  // namespace drt::eval
