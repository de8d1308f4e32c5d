#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "drt/models/network.hpp"

namespace drt::models {

// Stored next to the weights as meta.json.
struct ModelMeta {
  std::string name;
  std::uint64_t seed = 0;
  std::string arch;
  std::size_t image_size = 0;
  std::size_t num_outputs = 0;
  std::vector<std::string> class_names;
  std::vector<std::string> layer_keys;
  std::map<std::string, Shape> shapes;
  double val_metric = 0.0;
};

struct LoadedModel {
  SequentialModel model;
  ModelMeta meta;
};

std::filesystem::path checkpoint_dir(const std::filesystem::path& root, const std::string& name, std::uint64_t seed);

// Writes {root}/{name}/{seed}/weights and meta.json; returns the directory.
std::filesystem::path save_checkpoint(const std::filesystem::path& root, const SequentialModel& model,
                                      ModelMeta meta);

// Throws LoadFailure naming the path on any problem.
LoadedModel load_checkpoint(const std::filesystem::path& dir);

}  // namespace drt::models
