#include "drt/models/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <json.hpp>

#include "drt/errors.hpp"
#include "drt/models/desk.hpp"

namespace drt::models {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[8] = {'D', 'R', 'T', 'W', 'v', '1', '\0', '\0'};

}  // namespace

fs::path checkpoint_dir(const fs::path& root, const std::string& name, std::uint64_t seed) {
  return root / name / std::to_string(seed);
}

fs::path save_checkpoint(const fs::path& root, const SequentialModel& model, ModelMeta meta) {
  const fs::path dir = checkpoint_dir(root, meta.name, meta.seed);
  fs::create_directories(dir);
  meta.layer_keys = model.layer_keys();
  meta.shapes = model.shape_table();

  const auto params = model.flat_params();
  {
    std::ofstream out(dir / "weights", std::ios::binary);
    if (!out) throw LoadFailure("cannot write '" + (dir / "weights").string() + "'");
    out.write(kMagic, sizeof kMagic);
    const std::uint64_t count = params.size();
    out.write(reinterpret_cast<const char*>(&count), sizeof count);
    out.write(reinterpret_cast<const char*>(params.data()), static_cast<std::streamsize>(params.size() * sizeof(double)));
  }

  nlohmann::json j;
  j["name"] = meta.name;
  j["seed"] = meta.seed;
  j["arch"] = meta.arch;
  j["image_size"] = meta.image_size;
  j["num_outputs"] = meta.num_outputs;
  j["class_names"] = meta.class_names;
  j["layer_keys"] = meta.layer_keys;
  j["shapes"] = meta.shapes;
  j["val_metric"] = meta.val_metric;
  std::ofstream(dir / "meta.json") << j.dump(2) << '\n';
  return dir;
}

LoadedModel load_checkpoint(const fs::path& dir) {
  const fs::path meta_path = dir / "meta.json";
  const fs::path weights_path = dir / "weights";
  std::ifstream meta_in(meta_path);
  if (!meta_in) throw LoadFailure("missing checkpoint metadata '" + meta_path.string() + "'");
  ModelMeta meta;
  try {
    const auto j = nlohmann::json::parse(meta_in);
    meta.name = j.at("name").get<std::string>();
    meta.seed = j.at("seed").get<std::uint64_t>();
    meta.arch = j.at("arch").get<std::string>();
    meta.image_size = j.at("image_size").get<std::size_t>();
    meta.num_outputs = j.at("num_outputs").get<std::size_t>();
    meta.class_names = j.at("class_names").get<std::vector<std::string>>();
    meta.layer_keys = j.at("layer_keys").get<std::vector<std::string>>();
    meta.shapes = j.at("shapes").get<std::map<std::string, Shape>>();
    meta.val_metric = j.value("val_metric", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw LoadFailure("malformed checkpoint metadata '" + meta_path.string() + "': " + e.what());
  }

  SequentialModel model = build_architecture(meta.arch, meta.image_size, meta.num_outputs);
  model.set_name(meta.name + "@" + std::to_string(meta.seed));

  std::ifstream in(weights_path, std::ios::binary);
  if (!in) throw LoadFailure("missing checkpoint weights '" + weights_path.string() + "'");
  char magic[sizeof kMagic];
  std::uint64_t count = 0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&count), sizeof count);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0 || count != model.param_count()) {
    throw LoadFailure("checkpoint weights '" + weights_path.string() + "' do not match architecture " + meta.arch);
  }
  std::vector<double> params(count);
  in.read(reinterpret_cast<char*>(params.data()), static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw LoadFailure("truncated checkpoint weights '" + weights_path.string() + "'");
  model.set_flat_params(params);
  if (model.layer_keys() != meta.layer_keys || model.shape_table() != meta.shapes) {
    throw LoadFailure("checkpoint '" + dir.string() + "' layer table disagrees with architecture " + meta.arch);
  }
  return {std::move(model), std::move(meta)};
}

}  // namespace drt::models
