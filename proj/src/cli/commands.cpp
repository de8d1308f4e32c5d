#include "drt/cli/commands.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "drt/attack/projection.hpp"
#include "drt/errors.hpp"
#include "drt/eval/report.hpp"
#include "drt/eval/sweeps.hpp"
#include "drt/io/dataset.hpp"
#include "drt/io/image_io.hpp"
#include "drt/models/checkpoint.hpp"
#include "drt/models/desk.hpp"
#include "drt/models/profiler.hpp"
#include "drt/targets/mock_api.hpp"

namespace drt::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_manifest(const fs::path& out, const std::string& command, const RunConfig& cfg, const std::string& started,
                    const json& artifacts, const json& extra = json::object()) {
  json m{{"toolkit_version", kToolkitVersion},
         {"command", command},
         {"config", to_json(cfg)},
         {"started_at", started},
         {"finished_at", timestamp()},
         {"artifacts", artifacts}};
  for (const auto& [k, v] : extra.items()) m[k] = v;
  std::ofstream(out / "manifest.json") << m.dump(2) << '\n';
}

std::vector<std::unique_ptr<targets::TargetAdapter>> make_targets(const RunConfig& cfg) {
  std::vector<std::unique_ptr<targets::TargetAdapter>> out;
  for (const auto& t : cfg.targets) {
    if (t.kind == "mock") {
      out.push_back(targets::mock_api_adapter(t.fixture_dir, {t.max_attempts}));
    } else {
      std::optional<targets::Task> task;
      if (t.task) task = targets::task_from_string(*t.task);
      out.push_back(targets::local_adapter(cfg.checkpoint(t.model), task));
    }
  }
  return out;
}

std::vector<const targets::TargetAdapter*> raw(const std::vector<std::unique_ptr<targets::TargetAdapter>>& v) {
  std::vector<const targets::TargetAdapter*> out;
  for (const auto& p : v) out.push_back(p.get());
  return out;
}

io::LabeledImages load_split(const RunConfig& cfg) {
  if (cfg.dataset_dir.empty()) throw InvalidConfig("dataset_dir", "required");
  return io::load_images(io::load_image_folder(cfg.dataset_dir, cfg.split), cfg.limit);
}

std::vector<int> attack_labels(const RunConfig& cfg, const io::LabeledImages& data,
                               const models::SurrogateModel& model) {
  if (cfg.label_source == "dataset") return data.labels;
  std::vector<int> labels;
  for (std::size_t i = 0; i < data.images.size(); ++i) labels.push_back(model.predict(data.images.image(i)));
  return labels;
}

void prepare_out(const RunConfig& cfg) {
  if (cfg.out.empty()) throw InvalidConfig("out", "required");
  fs::create_directories(cfg.out);
}

}  // namespace

fs::path cmd_attack(const RunConfig& cfg, std::ostream& log) {
  validate_for_attack(cfg);
  const std::string started = timestamp();
  const auto kind = attack::attack_kind_from_string(cfg.attack);
  auto source = models::load_checkpoint(cfg.checkpoint(cfg.source_model));
  if (kind == attack::AttackKind::dr && !source.model.has_layer(cfg.attack_config.target_layer)) {
    throw InvalidConfig("attack_config.target_layer", "'" + cfg.attack_config.target_layer + "' is not a layer of " +
                                                          source.model.name());
  }
  const auto data = load_split(cfg);
  // Dispersion reduction consumes no labels at all.
  const auto labels = kind == attack::AttackKind::dr ? std::vector<int>{} : attack_labels(cfg, data, source.model);
  prepare_out(cfg);

  log << "attack " << cfg.attack << " on " << data.images.size() << " images with " << source.model.name() << '\n';
  const auto result = attack::run_attack(kind, data.images, labels, source.model, cfg.attack_config, cfg.workers);

  // Quantize to the 8-bit grid, then assert the budget on what is saved.
  Tensor quantized = result.adversarial.tensor();
  const std::size_t stride = data.images.image_size();
  for (std::size_t i = 0; i < data.images.size(); ++i) {
    auto adv = std::span<double>(quantized.data).subspan(i * stride, stride);
    const auto clean = data.images.image_values(i);
    attack::quantize_into_ball(adv, clean, cfg.attack_config.epsilon);
    const double linf = attack::linf_distance(adv, clean);
    if (linf > cfg.attack_config.epsilon) {
      throw Error("budget violated for image '" + data.images.id(i) + "': " + std::to_string(linf));
    }
  }
  const ImageBatch adversarial(std::move(quantized), data.images.ids());

  fs::remove_all(cfg.out / "images");
  io::save_image_dir(cfg.out / "images", adversarial);
  {
    std::ofstream trace(cfg.out / "trace.jsonl");
    attack::write_trace_jsonl(trace, result.traces);
  }

  double first = 0.0, last = 0.0;
  json best = json::object();
  for (std::size_t i = 0; i < result.traces.size(); ++i) {
    first += result.traces[i].records.front().objective;
    last += result.converged_objective[i];
    best[result.traces[i].id] = result.traces[i].best_iteration;
  }
  if (!result.traces.empty()) {
    first /= static_cast<double>(result.traces.size());
    last /= static_cast<double>(result.traces.size());
  }
  log << "mean objective " << first << " -> " << last << '\n';

  write_manifest(cfg.out, "attack", cfg, started, {{"images", "images"}, {"trace", "trace.jsonl"}},
                 {{"source_model", source.model.name()},
                  {"attack", cfg.attack},
                  {"image_count", adversarial.size()},
                  {"mean_objective_initial", first},
                  {"mean_objective_final", last},
                  {"best_iteration", best}});
  return cfg.out;
}

fs::path cmd_profile(const RunConfig& cfg, std::ostream& log) {
  const std::string started = timestamp();
  auto source = models::load_checkpoint(cfg.checkpoint(cfg.source_model));
  const auto data = load_split(cfg);
  prepare_out(cfg);
  const auto adapters = make_targets(cfg);

  models::AdversarialEvaluator evaluator;
  if (!adapters.empty()) {
    evaluator = [&](const std::string&, const ImageBatch& adv) {
      return eval::relative_eval(*adapters.front(), data.images, adv).adv_value;
    };
  }
  const auto profile = models::profile_layers(source.model, data.images, cfg.attack_config, evaluator, cfg.workers);
  {
    std::ofstream csv(cfg.out / "layer_profile.csv");
    eval::write_profile_csv(csv, profile);
  }
  std::ofstream(cfg.out / "recommended_layer.txt") << profile.recommended << '\n';
  json detail = json::array();
  for (const auto& r : profile.rows) {
    json row{{"layer", r.layer},
             {"std_before", r.std_before},
             {"std_after", r.std_after},
             {"delta", r.delta},
             {"per_image_before", r.per_image_before},
             {"per_image_after", r.per_image_after}};
    if (r.downstream_metric) row["downstream_metric"] = *r.downstream_metric;
    detail.push_back(row);
    log << r.layer << ": std " << r.std_before << " -> " << r.std_after << '\n';
  }
  std::ofstream(cfg.out / "layer_profile.json") << json{{"rows", detail}, {"recommended", profile.recommended}}.dump(2)
                                                 << '\n';
  log << "recommended layer " << profile.recommended << '\n';
  write_manifest(cfg.out, "profile", cfg, started,
                 {{"profile_csv", "layer_profile.csv"},
                  {"profile_json", "layer_profile.json"},
                  {"recommended", "recommended_layer.txt"}},
                 {{"source_model", source.model.name()}});
  return cfg.out;
}

fs::path cmd_eval(const RunConfig& cfg, std::ostream& log) {
  validate_for_eval(cfg);
  if (cfg.adv_dirs.empty()) throw InvalidConfig("adv_dirs", "at least one adversarial directory is required");
  const std::string started = timestamp();
  const ImageBatch clean = cfg.clean_dir ? io::load_image_dir(*cfg.clean_dir) : load_split(cfg).images;
  const auto adapters = make_targets(cfg);

  eval::EvalReport report;
  report.notes.push_back("relative metrics in percent; benign predictions of each target are the reference");
  report.notes.push_back("detection scored as mAP at IoU 0.5");
  std::set<std::string> seen;
  for (const auto& dir : cfg.adv_dirs) {
    std::string attack_name = dir.filename().string(), source_name = "unknown";
    if (fs::exists(dir / "manifest.json")) {
      std::ifstream in(dir / "manifest.json");
      const auto m = json::parse(in, nullptr, false);
      if (!m.is_discarded()) {
        attack_name = m.value("attack", attack_name);
        source_name = m.value("source_model", source_name);
      }
    }
    // Two runs of the same attack stay distinguishable in the table.
    if (!seen.insert(attack_name).second) attack_name += "[" + dir.filename().string() + "]";
    const fs::path images = fs::is_directory(dir / "images") ? dir / "images" : dir;
    const ImageBatch adv = io::load_image_dir(images);
    for (const auto& adapter : adapters) {
      const auto score = eval::relative_eval(*adapter, clean, adv);
      log << attack_name << " vs " << score.target << ": " << score.metric_name << " " << score.adv_value
          << " (excluded " << score.excluded << ")\n";
      report.rows.push_back(eval::make_row(source_name, attack_name, score));
    }
  }
  prepare_out(cfg);
  {
    std::ofstream csv(cfg.out / "eval_report.csv");
    eval::write_report_csv(csv, report);
    std::ofstream js(cfg.out / "eval_report.json");
    eval::write_report_json(js, report);
    std::ofstream table(cfg.out / "eval_table.csv");
    eval::write_table_csv(table, report);
  }
  write_manifest(cfg.out, "eval", cfg, started,
                 {{"report_csv", "eval_report.csv"}, {"report_json", "eval_report.json"}, {"table_csv", "eval_table.csv"}});
  return cfg.out;
}

fs::path cmd_sweep(const RunConfig& cfg, std::ostream& log) {
  if (cfg.targets.empty()) throw InvalidConfig("targets", "at least one target is required");
  const std::string started = timestamp();
  auto source = models::load_checkpoint(cfg.checkpoint(cfg.source_model));
  const auto data = load_split(cfg);
  const auto adapters = make_targets(cfg);
  prepare_out(cfg);

  eval::SweepContext ctx;
  ctx.source = &source.model;
  ctx.clean = data.images;
  ctx.labels = attack_labels(cfg, data, source.model);
  ctx.targets = raw(adapters);
  ctx.workers = cfg.workers;

  eval::EvalReport report;
  json artifacts;
  if (cfg.sweep.kind == "steps") {
    std::vector<attack::AttackKind> kinds;
    for (const auto& a : cfg.sweep.attacks) {
      kinds.push_back(attack::attack_kind_from_string(a));
      if (kinds.back() == attack::AttackKind::dr && cfg.attack_config.target_layer.empty()) {
        throw InvalidConfig("attack_config.target_layer", "required for the dr attack");
      }
    }
    const auto sweep = eval::sweep_steps(ctx, kinds, cfg.sweep.n_values, cfg.attack_config);
    report = sweep.report;
    std::ofstream curve(cfg.out / "step_curve.csv");
    eval::write_step_curve_csv(curve, report);
    json trends = json::array();
    for (const auto& t : sweep.trends) {
      trends.push_back({{"attack", t.attack}, {"target", t.target}, {"non_increasing", t.non_increasing}});
      log << t.attack << " vs " << t.target << (t.non_increasing ? ": non-increasing in N\n" : ": not monotone in N\n");
    }
    std::ofstream(cfg.out / "step_trends.json") << trends.dump(2) << '\n';
    artifacts = {{"curve_csv", "step_curve.csv"}, {"trends", "step_trends.json"}};
  } else {
    const auto layers = cfg.sweep.layers.empty() ? source.model.layer_keys() : cfg.sweep.layers;
    for (const auto& l : layers) source.model.require_layer(l);
    report = eval::sweep_layers(ctx, layers, cfg.attack_config);
    std::ofstream curve(cfg.out / "layer_curve.csv");
    eval::write_layer_curve_csv(curve, report);
    artifacts = {{"curve_csv", "layer_curve.csv"}};
  }
  {
    std::ofstream csv(cfg.out / "sweep_report.csv");
    eval::write_report_csv(csv, report);
    std::ofstream js(cfg.out / "sweep_report.json");
    eval::write_report_json(js, report);
  }
  artifacts["report_csv"] = "sweep_report.csv";
  artifacts["report_json"] = "sweep_report.json";
  log << "sweep rows " << report.rows.size() << '\n';
  write_manifest(cfg.out, "sweep", cfg, started, artifacts, {{"source_model", source.model.name()}});
  return cfg.out;
}

fs::path cmd_train(const RunConfig& cfg, std::ostream& log) {
  if (cfg.dataset_dir.empty()) throw InvalidConfig("dataset_dir", "required");
  models::TrainOptions opts;
  opts.epochs = cfg.train.epochs;
  opts.batch_size = cfg.train.batch_size;
  opts.learning_rate = cfg.train.learning_rate;
  opts.log = [&](const std::string& line) { log << line << '\n'; };
  const std::uint64_t seed = cfg.source_model.seed;

  models::TrainedModel trained = [&] {
    if (cfg.train.arch == "desk_fcn") return models::train_desk_segmenter(cfg.dataset_dir, seed, opts);
    if (cfg.train.arch == "small4conv") return models::train_desk_cnn(cfg.dataset_dir, cfg.train.arch, seed, opts);
    throw InvalidConfig("train.arch", "unknown architecture '" + cfg.train.arch + "'");
  }();

  models::ModelMeta meta;
  meta.name = cfg.train.name.value_or(cfg.train.arch == "desk_fcn" ? "desk_fcn" : "desk_cnn");
  meta.seed = seed;
  meta.arch = cfg.train.arch;
  meta.image_size = trained.model.input_shape()[1];
  meta.num_outputs = trained.model.num_classes();
  meta.class_names = trained.class_names;
  meta.val_metric = trained.report.val_metric;
  const fs::path dir = models::save_checkpoint(cfg.model_root, trained.model, meta);
  log << "saved " << dir.string() << " (validation " << trained.report.val_metric << ")\n";
  return dir;
}


namespace {

struct Overrides {
  std::optional<double> epsilon, alpha;
  std::optional<int> steps;
  std::optional<std::string> layer;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

void add_override_flags(CLI::App* sub, Overrides& o) {
  sub->add_option("--epsilon", o.epsilon, "L-inf budget in pixel units");
  sub->add_option("--alpha", o.alpha, "step size in pixel units");
  sub->add_option("--steps", o.steps, "number of iterations");
  sub->add_option("--layer", o.layer, "target layer key");
  sub->add_option("--seed", o.seed, "attack seed (model seed for train-desk-model)");
  sub->add_option("--out", o.out, "output directory");
}

RunConfig resolve(const std::string& path, const Overrides& o, bool seed_is_model) {
  RunConfig cfg = path.empty() ? RunConfig{} : load_config(path);
  if (o.epsilon) cfg.attack_config.epsilon = *o.epsilon;
  if (o.alpha) cfg.attack_config.alpha = *o.alpha;
  if (o.steps) cfg.attack_config.steps = *o.steps;
  if (o.layer) cfg.attack_config.target_layer = *o.layer;
  if (o.seed) {
    if (seed_is_model) cfg.source_model.seed = *o.seed;
    else cfg.attack_config.rng_seed = *o.seed;
  }
  if (o.out) cfg.out = *o.out;
  try {
    cfg.attack_config.validate();
  } catch (const InvalidConfig& e) {
    throw InvalidConfig("attack_config." + e.field(), e.message());
  }
  return cfg;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"drt: feature dispersion attacks and transfer evaluation"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;
  using Command = std::filesystem::path (*)(const RunConfig&, std::ostream&);
  const std::vector<std::pair<std::string, Command>> commands{{"attack", cmd_attack},
                                                              {"profile", cmd_profile},
                                                              {"eval", cmd_eval},
                                                              {"sweep", cmd_sweep},
                                                              {"train-desk-model", cmd_train}};
  std::map<CLI::App*, Command> handlers;
  for (const auto& [name, fn] : commands) {
    auto* sub = app.add_subcommand(name, name + " using a JSON run config");
    auto* opt = sub->add_option("config", config_path, "run config (or a previous manifest.json)");
    if (name != "train-desk-model") opt->required();
    add_override_flags(sub, overrides);
    handlers[sub] = fn;
  }

  io::SyntheticSpec synth;
  std::string synth_out;
  auto* make_dataset = app.add_subcommand("make-dataset", "write the synthetic shapes dataset");
  make_dataset->add_option("--out", synth_out, "dataset root")->required();
  make_dataset->add_option("--image-size", synth.image_size);
  make_dataset->add_option("--train-per-class", synth.train_per_class);
  make_dataset->add_option("--val-per-class", synth.val_per_class);
  make_dataset->add_option("--seed", synth.seed);

  std::string rec_model, rec_images, rec_fixture, rec_service = "recorded", rec_task;
  auto* record = app.add_subcommand("record-fixture", "record a local target's answers as a mock fixture");
  record->add_option("--model", rec_model, "checkpoint directory")->required();
  record->add_option("--images", rec_images, "image directory")->required();
  record->add_option("--fixture", rec_fixture, "fixture directory")->required();
  record->add_option("--service", rec_service);
  record->add_option("--task", rec_task, "classify | detect | segment");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (make_dataset->parsed()) {
      io::generate_shapes_dataset(synth_out, synth);
      std::cout << synth_out << '\n';
      return 0;
    }
    if (record->parsed()) {
      std::optional<targets::Task> task;
      if (!rec_task.empty()) task = targets::task_from_string(rec_task);
      const auto adapter = targets::local_adapter(rec_model, task);
      targets::record_fixture(*adapter, io::load_image_dir(rec_images), rec_fixture, rec_service);
      std::cout << rec_fixture << '\n';
      return 0;
    }
    for (const auto& [sub, fn] : handlers) {
      if (!sub->parsed()) continue;
      const RunConfig cfg = resolve(config_path, overrides, sub->get_name() == "train-desk-model");
      const auto out = fn(cfg, std::cerr);
      std::cout << out.string() << '\n';
      return 0;
    }
  } catch (const InvalidConfig& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}

}  // namespace drt::cli
