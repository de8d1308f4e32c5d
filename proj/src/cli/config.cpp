#include "drt/cli/config.hpp"

#include <fstream>
#include <set>

#include "drt/errors.hpp"
#include "drt/targets/adapter.hpp"

namespace drt::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void reject_unknown(const json& obj, const std::string& prefix, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw InvalidConfig(prefix.empty() ? "config" : prefix, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw InvalidConfig(join(prefix, key), "unknown key");
  }
}

template <typename T>
void read(const json& obj, const std::string& prefix, const std::string& key, T& out) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return;
  try {
    if constexpr (std::is_same_v<T, fs::path>) {
      out = it->get<std::string>();
    } else if constexpr (std::is_same_v<T, std::optional<fs::path>>) {
      out = fs::path(it->get<std::string>());
    } else if constexpr (std::is_same_v<T, std::optional<std::string>>) {
      out = it->get<std::string>();
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw InvalidConfig(join(prefix, key), "expected true or false");
      out = it->get<bool>();
    } else if constexpr (std::is_unsigned_v<T> && std::is_integral_v<T>) {
      if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<long long>() >= 0)) throw InvalidConfig(join(prefix, key), "expected a non-negative integer");
      out = it->get<T>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) throw InvalidConfig(join(prefix, key), "expected an integer");
      out = it->get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) throw InvalidConfig(join(prefix, key), "expected a number");
      out = it->get<T>();
    } else {
      out = it->get<T>();
    }
  } catch (const json::exception& e) {
    throw InvalidConfig(join(prefix, key), std::string("wrong type: ") + e.what());
  }
}

ModelRef parse_model(const json& j, const std::string& prefix) {
  reject_unknown(j, prefix, {"name", "seed", "path"});
  ModelRef ref;
  read(j, prefix, "name", ref.name);
  read(j, prefix, "seed", ref.seed);
  read(j, prefix, "path", ref.path);
  return ref;
}

attack::AttackConfig parse_attack_config(const json& j, const std::string& prefix) {
  reject_unknown(j, prefix,
                 {"epsilon", "alpha", "steps", "momentum", "transform_prob", "ti_kernel_size", "optimizer_mode", "beta1",
                  "beta2", "learning_rate", "adam_eps", "target_layer", "rng_seed", "resize_min", "resize_max",
                  "keep_best"});
  attack::AttackConfig c;
  read(j, prefix, "epsilon", c.epsilon);
  read(j, prefix, "alpha", c.alpha);
  read(j, prefix, "steps", c.steps);
  read(j, prefix, "momentum", c.momentum);
  read(j, prefix, "transform_prob", c.transform_prob);
  read(j, prefix, "ti_kernel_size", c.ti_kernel_size);
  std::string mode(attack::to_string(c.optimizer_mode));
  read(j, prefix, "optimizer_mode", mode);
  try {
    c.optimizer_mode = attack::optimizer_mode_from_string(mode);
  } catch (const InvalidConfig& e) {
    throw InvalidConfig(join(prefix, "optimizer_mode"), e.message());
  }
  read(j, prefix, "beta1", c.beta1);
  read(j, prefix, "beta2", c.beta2);
  read(j, prefix, "learning_rate", c.learning_rate);
  read(j, prefix, "adam_eps", c.adam_eps);
  read(j, prefix, "target_layer", c.target_layer);
  read(j, prefix, "rng_seed", c.rng_seed);
  read(j, prefix, "resize_min", c.resize_min);
  read(j, prefix, "resize_max", c.resize_max);
  read(j, prefix, "keep_best", c.keep_best);
  try {
    c.validate();
  } catch (const InvalidConfig& e) {
    throw InvalidConfig(join(prefix, e.field()), e.message());
  }
  return c;
}

TargetSpec parse_target(const json& j, const std::string& prefix) {
  reject_unknown(j, prefix, {"kind", "model", "task", "fixture_dir", "max_attempts"});
  TargetSpec t;
  read(j, prefix, "kind", t.kind);
  if (t.kind != "local" && t.kind != "mock") throw InvalidConfig(join(prefix, "kind"), "expected local or mock");
  if (j.contains("model")) t.model = parse_model(j.at("model"), join(prefix, "model"));
  read(j, prefix, "task", t.task);
  if (t.task) {
    try {
      targets::task_from_string(*t.task);
    } catch (const InvalidConfig& e) {
      throw InvalidConfig(join(prefix, "task"), e.message());
    }
  }
  read(j, prefix, "fixture_dir", t.fixture_dir);
  read(j, prefix, "max_attempts", t.max_attempts);
  if (t.kind == "mock" && t.fixture_dir.empty()) throw InvalidConfig(join(prefix, "fixture_dir"), "required for mock targets");
  if (t.max_attempts < 1) throw InvalidConfig(join(prefix, "max_attempts"), "must be >= 1");
  return t;
}

json model_json(const ModelRef& m) {
  json j{{"name", m.name}, {"seed", m.seed}};
  if (m.path) j["path"] = m.path->string();
  return j;
}

}  // namespace

fs::path RunConfig::checkpoint(const ModelRef& ref) const {
  if (ref.path) return *ref.path;
  return model_root / ref.name / std::to_string(ref.seed);
}

RunConfig parse_config(const json& input) {
  const json& doc = input.contains("config") && input.contains("toolkit_version") ? input.at("config") : input;
  reject_unknown(doc, "",
                 {"dataset_dir", "split", "limit", "model_root", "source_model", "attack", "label_source",
                  "attack_config", "workers", "out", "clean_dir", "adv_dirs", "targets", "train", "sweep"});
  RunConfig cfg;
  read(doc, "", "dataset_dir", cfg.dataset_dir);
  read(doc, "", "split", cfg.split);
  read(doc, "", "limit", cfg.limit);
  read(doc, "", "model_root", cfg.model_root);
  if (doc.contains("source_model")) cfg.source_model = parse_model(doc.at("source_model"), "source_model");
  read(doc, "", "attack", cfg.attack);
  try {
    attack::attack_kind_from_string(cfg.attack);
  } catch (const InvalidConfig& e) {
    throw InvalidConfig("attack", e.message());
  }
  read(doc, "", "label_source", cfg.label_source);
  if (cfg.label_source != "dataset" && cfg.label_source != "model") {
    throw InvalidConfig("label_source", "expected dataset or model");
  }
  if (doc.contains("attack_config")) cfg.attack_config = parse_attack_config(doc.at("attack_config"), "attack_config");
  read(doc, "", "workers", cfg.workers);
  read(doc, "", "out", cfg.out);
  read(doc, "", "clean_dir", cfg.clean_dir);
  if (doc.contains("adv_dirs")) {
    std::vector<std::string> dirs;
    read(doc, "", "adv_dirs", dirs);
    for (auto& d : dirs) cfg.adv_dirs.emplace_back(d);
  }
  if (doc.contains("targets")) {
    const auto& arr = doc.at("targets");
    if (!arr.is_array()) throw InvalidConfig("targets", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      cfg.targets.push_back(parse_target(arr[i], "targets[" + std::to_string(i) + "]"));
    }
  }
  if (doc.contains("train")) {
    const auto& t = doc.at("train");
    reject_unknown(t, "train", {"arch", "name", "epochs", "batch_size", "learning_rate"});
    read(t, "train", "arch", cfg.train.arch);
    read(t, "train", "name", cfg.train.name);
    read(t, "train", "epochs", cfg.train.epochs);
    read(t, "train", "batch_size", cfg.train.batch_size);
    read(t, "train", "learning_rate", cfg.train.learning_rate);
    if (cfg.train.epochs < 1) throw InvalidConfig("train.epochs", "must be >= 1");
    if (cfg.train.batch_size < 1) throw InvalidConfig("train.batch_size", "must be >= 1");
  }
  if (doc.contains("sweep")) {
    const auto& s = doc.at("sweep");
    reject_unknown(s, "sweep", {"kind", "attacks", "n_values", "layers"});
    read(s, "sweep", "kind", cfg.sweep.kind);
    read(s, "sweep", "attacks", cfg.sweep.attacks);
    read(s, "sweep", "n_values", cfg.sweep.n_values);
    read(s, "sweep", "layers", cfg.sweep.layers);
    if (cfg.sweep.kind != "steps" && cfg.sweep.kind != "layers") throw InvalidConfig("sweep.kind", "expected steps or layers");
    for (const auto& a : cfg.sweep.attacks) {
      try {
        attack::attack_kind_from_string(a);
      } catch (const InvalidConfig& e) {
        throw InvalidConfig("sweep.attacks", e.message());
      }
    }
    if (cfg.sweep.n_values.empty()) throw InvalidConfig("sweep.n_values", "must not be empty");
    for (int n : cfg.sweep.n_values) {
      if (n < 1) throw InvalidConfig("sweep.n_values", "every step count must be >= 1");
    }
  }
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("config", "cannot open '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidConfig("config", "'" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

json to_json(const RunConfig& cfg) {
  const auto& a = cfg.attack_config;
  json j;
  j["dataset_dir"] = cfg.dataset_dir.string();
  j["split"] = cfg.split;
  j["limit"] = cfg.limit;
  j["model_root"] = cfg.model_root.string();
  j["source_model"] = model_json(cfg.source_model);
  j["attack"] = cfg.attack;
  j["label_source"] = cfg.label_source;
  j["attack_config"] = {{"epsilon", a.epsilon},
                        {"alpha", a.alpha},
                        {"steps", a.steps},
                        {"momentum", a.momentum},
                        {"transform_prob", a.transform_prob},
                        {"ti_kernel_size", a.ti_kernel_size},
                        {"optimizer_mode", std::string(attack::to_string(a.optimizer_mode))},
                        {"beta1", a.beta1},
                        {"beta2", a.beta2},
                        {"learning_rate", a.learning_rate},
                        {"adam_eps", a.adam_eps},
                        {"target_layer", a.target_layer},
                        {"rng_seed", a.rng_seed},
                        {"resize_min", a.resize_min},
                        {"resize_max", a.resize_max},
                        {"keep_best", a.keep_best}};
  j["workers"] = cfg.workers;
  j["out"] = cfg.out.string();
  if (cfg.clean_dir) j["clean_dir"] = cfg.clean_dir->string();
  j["adv_dirs"] = json::array();
  for (const auto& d : cfg.adv_dirs) j["adv_dirs"].push_back(d.string());
  j["targets"] = json::array();
  for (const auto& t : cfg.targets) {
    json tj{{"kind", t.kind}, {"model", model_json(t.model)}, {"max_attempts", t.max_attempts}};
    if (t.task) tj["task"] = *t.task;
    if (!t.fixture_dir.empty()) tj["fixture_dir"] = t.fixture_dir.string();
    j["targets"].push_back(tj);
  }
  j["train"] = {{"arch", cfg.train.arch},
                {"epochs", cfg.train.epochs},
                {"batch_size", cfg.train.batch_size},
                {"learning_rate", cfg.train.learning_rate}};
  if (cfg.train.name) j["train"]["name"] = *cfg.train.name;
  j["sweep"] = {{"kind", cfg.sweep.kind},
                {"attacks", cfg.sweep.attacks},
                {"n_values", cfg.sweep.n_values},
                {"layers", cfg.sweep.layers}};
  return j;
}

void validate_for_attack(const RunConfig& cfg) {
  if (cfg.dataset_dir.empty()) throw InvalidConfig("dataset_dir", "required");
  if (cfg.out.empty()) throw InvalidConfig("out", "required");
  if (attack::attack_kind_from_string(cfg.attack) == attack::AttackKind::dr && cfg.attack_config.target_layer.empty()) {
    throw InvalidConfig("attack_config.target_layer", "required for the dr attack");
  }
  try {
    cfg.attack_config.validate();
  } catch (const InvalidConfig& e) {
    throw InvalidConfig("attack_config." + e.field(), e.message());
  }
}

void validate_for_eval(const RunConfig& cfg) {
  if (cfg.out.empty()) throw InvalidConfig("out", "required");
  if (cfg.targets.empty()) throw InvalidConfig("targets", "at least one target is required");
  if (!cfg.clean_dir && cfg.dataset_dir.empty()) throw InvalidConfig("clean_dir", "clean_dir or dataset_dir is required");
}

}  // namespace drt::cli
