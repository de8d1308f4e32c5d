#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "drt/attack/attacks.hpp"
#include "drt/attack/config.hpp"

namespace drt::cli {

struct ModelRef {
  std::string name = "desk_cnn";
  std::uint64_t seed = 1;
  std::optional<std::filesystem::path> path;  // explicit checkpoint dir
};

struct TargetSpec {
  std::string kind = "local";  // local | mock
  ModelRef model;
  std::optional<std::string> task;
  std::filesystem::path fixture_dir;
  int max_attempts = 3;
};

struct TrainSpec {
  std::string arch = "small4conv";
  std::optional<std::string> name;
  int epochs = 12;
  std::size_t batch_size = 32;
  double learning_rate = 0.05;
};

struct SweepSpec {
  std::string kind = "steps";  // steps | layers
  std::vector<std::string> attacks{"dr"};
  std::vector<int> n_values{20, 100, 500};
  std::vector<std::string> layers;  // empty: every layer of the source
};

// One declarative document drives every command. Attack hyperparameters
// default to eps 16, alpha 4 and 100 steps, so a minimal config only names
// paths.
struct RunConfig {
  std::filesystem::path dataset_dir;
  std::string split = "val";
  std::size_t limit = 0;
  std::filesystem::path model_root = "models";
  ModelRef source_model;
  std::string attack = "dr";
  std::string label_source = "dataset";  // dataset | model
  attack::AttackConfig attack_config;
  std::size_t workers = 1;
  std::filesystem::path out;
  std::optional<std::filesystem::path> clean_dir;
  std::vector<std::filesystem::path> adv_dirs;
  std::vector<TargetSpec> targets;
  TrainSpec train;
  SweepSpec sweep;

  std::filesystem::path checkpoint(const ModelRef& ref) const;
};

// Throws InvalidConfig naming the offending field, e.g.
// "attack_config.epsilon". A run manifest is accepted too: its "config"
// member is used.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);

// Checks the parts a command needs; throws InvalidConfig.
void validate_for_attack(const RunConfig& cfg);
void validate_for_eval(const RunConfig& cfg);

}  // namespace drt::cli
