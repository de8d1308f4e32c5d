#include "drt/targets/mock_api.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "drt/errors.hpp"
#include "drt/io/image_io.hpp"

namespace drt::targets {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int label_id(const LabelMap& labels, const std::string& name) {
  const auto it = std::find(labels.begin(), labels.end(), name);
  if (it == labels.end()) throw TargetFailure("response names unknown label '" + name + "'");
  return static_cast<int>(it - labels.begin());
}

const std::string& label_name(const LabelMap& labels, int id) {
  if (id < 0 || static_cast<std::size_t>(id) >= labels.size()) {
    throw TargetFailure("prediction label " + std::to_string(id) + " outside the label map");
  }
  return labels[static_cast<std::size_t>(id)];
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadFailure("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw LoadFailure("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

}  // namespace

json encode_response(const Prediction& prediction, Task task, const LabelMap& labels) {
  json out;
  switch (task) {
    case Task::classify: {
      const int id = std::get<int>(prediction);
      out["labels"] = json::array();
      if (id >= 0) out["labels"].push_back({{"name", label_name(labels, id)}, {"score", 1.0}});
      break;
    }
    case Task::detect: {
      out["objects"] = json::array();
      for (const auto& d : std::get<eval::Detections>(prediction)) {
        out["objects"].push_back({{"name", label_name(labels, d.label)},
                                  {"score", d.score},
                                  {"bbox", {d.box.x1, d.box.y1, d.box.x2, d.box.y2}}});
      }
      break;
    }
    case Task::segment:
      // The mask itself lives in a sidecar file; callers fill in mask_path.
      out["mask_path"] = "";
      break;
  }
  return out;
}

Prediction parse_response(const json& response, Task task, const LabelMap& labels, const fs::path& fixture_dir) {
  try {
    switch (task) {
      case Task::classify: {
        int best = -1;
        double best_score = -1.0;
        for (const auto& l : response.at("labels")) {
          const double score = l.at("score").get<double>();
          if (score > best_score) {
            best_score = score;
            best = label_id(labels, l.at("name").get<std::string>());
          }
        }
        return best;
      }
      case Task::detect: {
        eval::Detections dets;
        for (const auto& o : response.at("objects")) {
          const auto bbox = o.at("bbox").get<std::vector<double>>();
          if (bbox.size() != 4) throw TargetFailure("bbox must have 4 coordinates");
          eval::Detection d{{bbox[0], bbox[1], bbox[2], bbox[3]},
                            label_id(labels, o.at("name").get<std::string>()),
                            o.at("score").get<double>()};
          if (!d.box.valid()) throw TargetFailure("response contains a degenerate box");
          if (!(d.score >= 0.0 && d.score <= 1.0)) throw TargetFailure("response score outside [0, 1]");
          dets.push_back(d);
        }
        return dets;
      }
      case Task::segment: {
        const auto gray = io::read_gray(fixture_dir / response.at("mask_path").get<std::string>());
        eval::SegmentationMask mask{gray.height, gray.width, {}};
        for (auto p : gray.pixels) {
          if (p >= labels.size()) throw TargetFailure("mask label outside the label map");
          mask.labels.push_back(p);
        }
        return mask;
      }
    }
  } catch (const json::exception& e) {
    throw TargetFailure(std::string("malformed response: ") + e.what());
  } catch (const LoadFailure& e) {
    throw TargetFailure(e.what());
  }
  throw TargetFailure("unhandled task");
}

FixtureSource::FixtureSource(fs::path fixture_dir) : dir_(std::move(fixture_dir)) {
  const json manifest = read_json(dir_ / "manifest.json");
  try {
    service_ = manifest.value("service", "mock");
    task_ = task_from_string(manifest.at("task").get<std::string>());
    labels_ = manifest.at("label_map").get<LabelMap>();
    for (const auto& e : manifest.at("entries")) {
      entries_[e.at("sha256").get<std::string>()] =
          Entry{e.at("file").get<std::string>(), e.value("transient_failures", 0)};
    }
  } catch (const json::exception& e) {
    throw LoadFailure("malformed fixture manifest in '" + dir_.string() + "': " + e.what());
  }
}

json FixtureSource::fetch(const std::string& content_hash) const {
  const auto it = entries_.find(content_hash);
  if (it == entries_.end()) throw NotInFixture("no fixture response for image " + content_hash);
  if (it->second.transient_failures > 0) {
    std::lock_guard lock(mutex_);
    int& served = failures_served_[content_hash];
    if (served < it->second.transient_failures) {
      ++served;
      throw TransientFailure("simulated transient failure for " + content_hash);
    }
  }
  try {
    return read_json(dir_ / it->second.file);
  } catch (const LoadFailure& e) {
    throw TargetFailure(e.what());
  }
}

MockApiAdapter::MockApiAdapter(std::shared_ptr<const FixtureSource> source, RetryPolicy retry)
    : source_(std::move(source)), retry_(retry) {}

Prediction MockApiAdapter::invoke(const Tensor& image) const {
  const std::string hash = io::content_hash(image);
  for (int attempt = 1;; ++attempt) {
    try {
      return parse_response(source_->fetch(hash), task(), label_map(), source_->dir());
    } catch (const TransientFailure&) {
      if (attempt >= retry_.max_attempts) throw;
    }
  }
}

std::unique_ptr<TargetAdapter> mock_api_adapter(const fs::path& fixture_dir, RetryPolicy retry) {
  return std::make_unique<MockApiAdapter>(std::make_shared<const FixtureSource>(fixture_dir), retry);
}

void record_fixture(const TargetAdapter& adapter, const ImageBatch& images, const fs::path& fixture_dir,
                    const std::string& service) {
  fs::create_directories(fixture_dir);
  const fs::path manifest_path = fixture_dir / "manifest.json";
  json manifest;
  if (fs::exists(manifest_path)) {
    manifest = read_json(manifest_path);
    if (manifest.at("task").get<std::string>() != to_string(adapter.task())) {
      throw LoadFailure("fixture '" + fixture_dir.string() + "' records a different task");
    }
  } else {
    manifest = {{"service", service},
                {"task", std::string(to_string(adapter.task()))},
                {"label_map", adapter.label_map()},
                {"entries", json::array()}};
  }
  std::set<std::string> known;
  for (const auto& e : manifest["entries"]) known.insert(e.at("sha256").get<std::string>());

  for (std::size_t i = 0; i < images.size(); ++i) {
    const Tensor image = images.image(i);
    const std::string hash = io::content_hash(image);
    if (known.count(hash)) continue;
    const Prediction p = adapter.invoke(image);
    json response = encode_response(p, adapter.task(), adapter.label_map());
    if (adapter.task() == Task::segment) {
      const auto& mask = std::get<eval::SegmentationMask>(p);
      io::GrayImage gray{mask.height, mask.width, {}};
      for (int v : mask.labels) gray.pixels.push_back(static_cast<std::uint8_t>(v));
      const std::string mask_file = hash + ".pgm";
      io::write_gray(fixture_dir / mask_file, gray);
      response["mask_path"] = mask_file;
    }
    const std::string file = hash + ".json";
    std::ofstream(fixture_dir / file) << response.dump(2) << '\n';
    manifest["entries"].push_back({{"sha256", hash}, {"file", file}, {"image_id", images.id(i)}});
    known.insert(hash);
  }
  std::ofstream(manifest_path) << manifest.dump(2) << '\n';
}

}  // namespace drt::targets
