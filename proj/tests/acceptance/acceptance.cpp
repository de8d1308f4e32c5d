// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Usage: acceptance [work_dir]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "drt/attack/attacks.hpp"
#include "drt/attack/dispersion.hpp"
#include "drt/cli/commands.hpp"
#include "drt/eval/metrics.hpp"
#include "drt/eval/relative.hpp"
#include "drt/io/dataset.hpp"
#include "drt/models/affine_toy.hpp"
#include "drt/models/checkpoint.hpp"
#include "drt/targets/mock_api.hpp"
#include "oracles.hpp"

using namespace drt;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
  failures += !ok;
}

// Runs a criterion, turning an escaped exception into a FAIL line.
void criterion(const std::string& name, const std::function<std::pair<bool, std::string>()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    auto [ok, detail] = body();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream os;
    os << detail << " [" << std::fixed << std::setprecision(1) << secs << " s]";
    report(name, ok, os.str());
  } catch (const std::exception& e) {
    report(name, false, std::string("exception: ") + e.what());
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---- model-free criteria --------------------------------------------------

std::pair<bool, std::string> logit_change_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> nd;
  const std::size_t sizes[] = {2, 10, 100};
  double worst = 0;
  int done = 0;
  while (done < 1000) {
    const std::size_t n = sizes[done % 3];
    models::AffineToyModel toy{4, n, std::vector<double>(4 * n),
                               done % 2 ? models::ToyExtractor::tanh : models::ToyExtractor::identity};
    for (auto& w : toy.weights) w = nd(rng);
    std::vector<double> x(n);
    for (auto& v : x) v = nd(rng);
    if (oracle::sample_std(toy.features(x)) <= 1e-6) continue;
    const double alpha = 0.01 + 0.5 * std::abs(nd(rng));
    const auto r = models::verify_logit_change(toy, x, static_cast<std::size_t>(rng() % 4), alpha);
    worst = std::max(worst, r.abs_error);
    ++done;
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 10, "1000 instances, max |predicted - actual| = " + fmt(worst) + " (limit 1e-9)"};
}

std::pair<bool, std::string> gradient_check() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  double worst = 0;
  const std::size_t sizes[] = {2, 5, 64, 300, 2048};
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(sizes[trial % 5]);
    const double scale = std::pow(10.0, trial % 4 - 1);
    for (auto& x : v) x = scale * nd(rng);
    std::vector<double> g(v.size());
    attack::dispersion_with_gradient(v, g);
    const double h = 1e-5 * scale;
    double diff = 0, norm_a = 0, norm_fd = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double keep = v[i];
      v[i] = keep + h;
      const double up = attack::dispersion(v);
      v[i] = keep - h;
      const double down = attack::dispersion(v);
      v[i] = keep;
      const double fd = (up - down) / (2 * h);
      diff += (fd - g[i]) * (fd - g[i]);
      norm_a += g[i] * g[i];
      norm_fd += fd * fd;
    }
    worst = std::max(worst, std::sqrt(diff) / std::max(std::sqrt(norm_a), std::sqrt(norm_fd)));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-5 && secs < 10, "20 random tensors, max relative error " + fmt(worst) + " (limit 1e-5)"};
}

std::pair<bool, std::string> metric_oracles() {
  const auto t0 = std::chrono::steady_clock::now();
  using eval::Box;
  using eval::Detection;
  // Exhaustive AP: one image, one class, boxes from a pool with IoUs on both
  // sides of (and exactly at) 0.5, scores from three levels so ties occur.
  const Box pool[] = {{0, 0, 10, 10}, {2, 0, 12, 10}, {5, 0, 15, 10}, {0, 0, 10, 5}};
  const double scores[] = {0.9, 0.6, 0.03};
  std::vector<std::vector<Box>> ref_sets{{}};
  for (int a = 0; a < 4; ++a) {
    ref_sets.push_back({pool[a]});
    for (int b = a; b < 4; ++b) {
      ref_sets.push_back({pool[a], pool[b]});
      for (int c = b; c < 4; ++c) ref_sets.push_back({pool[a], pool[b], pool[c]});
    }
  }
  std::vector<eval::Detections> pred_sets{{}};
  for (std::size_t len = 1; len <= 4; ++len) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < len; ++i) total *= 12;
    for (std::size_t code = 0; code < total; ++code) {
      eval::Detections d;
      for (std::size_t i = 0, c = code; i < len; ++i, c /= 12) d.push_back({pool[c % 12 / 3], 0, scores[c % 3]});
      pred_sets.push_back(std::move(d));
    }
  }
  std::size_t ap_cases = 0, ap_bad = 0;
  double ap_worst = 0;
  for (const auto& rs : ref_sets) {
    eval::Detections refs;
    for (const auto& b : rs) refs.push_back({b, 0, 1.0});
    const eval::DetectionSet ref_set{refs};
    for (const auto& ps : pred_sets) {
      const eval::DetectionSet pred_set{ps};
      const double err = std::abs(eval::average_precision(pred_set, ref_set).mean_ap - oracle::mean_ap(pred_set, ref_set));
      ap_worst = std::max(ap_worst, err);
      ap_bad += err > 1e-12;
      ++ap_cases;
    }
  }
  // Random multi-image, multi-class instances within the same size limits.
  std::mt19937_64 rng(99);
  for (int t = 0; t < 100000; ++t) {
    eval::DetectionSet preds(2), refs(2);
    const int np = static_cast<int>(rng() % 5), nr = static_cast<int>(rng() % 4);
    auto box = [&] {
      const double x = rng() % 8, y = rng() % 8;
      return Box{x, y, x + 1 + rng() % 6, y + 1 + rng() % 6};
    };
    for (int k = 0; k < nr; ++k) refs[rng() % 2].push_back({box(), static_cast<int>(rng() % 3), 1.0});
    for (int k = 0; k < np; ++k) preds[rng() % 2].push_back({box(), static_cast<int>(rng() % 3), (rng() % 6) / 5.0});
    const double err = std::abs(eval::average_precision(preds, refs).mean_ap - oracle::mean_ap(preds, refs));
    ap_worst = std::max(ap_worst, err);
    ap_bad += err > 1e-12;
    ++ap_cases;
  }

  // Exhaustive mIoU over every raster pair with at most 6 pixels and 3
  // classes, then random rasters up to 8x8.
  std::size_t iou_cases = 0, iou_bad = 0;
  for (std::size_t h = 1; h <= 6; ++h) {
    for (std::size_t w = 1; h * w <= 6; ++w) {
      const std::size_t n = h * w;
      std::size_t total = 1;
      for (std::size_t i = 0; i < n; ++i) total *= 3;
      std::vector<int> p(n), r(n);
      for (std::size_t a = 0; a < total; ++a) {
        for (std::size_t i = 0, c = a; i < n; ++i, c /= 3) p[i] = static_cast<int>(c % 3);
        const eval::SegmentationMask pm{h, w, p};
        for (std::size_t b = 0; b < total; ++b) {
          for (std::size_t i = 0, c = b; i < n; ++i, c /= 3) r[i] = static_cast<int>(c % 3);
          iou_bad += eval::mean_iou(pm, {h, w, r}, 3) != oracle::mean_iou(p, r, 3);
          ++iou_cases;
        }
      }
    }
  }
  for (int t = 0; t < 100000; ++t) {
    const std::size_t h = 1 + rng() % 8, w = 1 + rng() % 8;
    std::vector<int> p(h * w), r(h * w);
    for (auto& v : p) v = static_cast<int>(rng() % 3);
    for (auto& v : r) v = static_cast<int>(rng() % 3);
    iou_bad += eval::mean_iou({h, w, p}, {h, w, r}, 3) != oracle::mean_iou(p, r, 3);
    ++iou_cases;
  }
  const double secs = seconds_since(t0);
  std::ostringstream os;
  os << "AP " << ap_cases << " instances, " << ap_bad << " mismatches (max err " << ap_worst << "); mIoU "
     << iou_cases << " raster pairs, " << iou_bad << " mismatches";
  return {ap_bad == 0 && iou_bad == 0 && secs < 60, os.str()};
}

// ---- criteria on the desk models ----------------------------------------

struct Desk {
  fs::path root;
  fs::path data;
  fs::path models;
  fs::path runs;
};

cli::RunConfig base_config(const Desk& d) {
  cli::RunConfig cfg;
  cfg.dataset_dir = d.data;
  cfg.model_root = d.models;
  cfg.split = "val";
  return cfg;
}

Desk prepare_desk(const fs::path& root) {
  Desk d{root, root / "data", root / "models", root / "runs"};
  fs::remove_all(root);
  io::generate_shapes_dataset(d.data, io::SyntheticSpec{});
  std::ostringstream log;
  for (std::uint64_t seed : {1, 2}) {
    auto cfg = base_config(d);
    cfg.source_model.seed = seed;
    cmd_train(cfg, log);
  }
  auto seg = base_config(d);
  seg.train.arch = "desk_fcn";
  cmd_train(seg, log);
  for (std::uint64_t seed : {1, 2}) {
    const auto meta = models::load_checkpoint(models::checkpoint_dir(d.models, "desk_cnn", seed)).meta;
    std::cout << "# desk_cnn seed " << seed << " validation accuracy " << meta.val_metric << std::endl;
  }
  std::cout << "# desk_fcn validation pixel accuracy "
            << models::load_checkpoint(models::checkpoint_dir(d.models, "desk_fcn", 1)).meta.val_metric << std::endl;
  return d;
}

std::pair<bool, std::string> budget_invariant(const Desk& d) {
  const auto clean = io::load_images(io::load_image_folder(d.data, "val"), 100).images;
  std::size_t violations = 0, checked = 0;
  double worst = 0;
  std::ostringstream log;
  for (std::string a : {"dr", "pgd", "mifgsm", "dim", "tidim"}) {
    auto cfg = base_config(d);
    cfg.limit = 100;
    cfg.attack = a;
    cfg.attack_config.target_layer = "conv3";
    cfg.out = d.runs / ("budget_" + a);
    cli::cmd_attack(cfg, log);
    const auto adv = io::load_image_dir(cfg.out / "images");
    if (adv.size() != clean.size()) return {false, a + " wrote " + std::to_string(adv.size()) + " images"};
    for (std::size_t i = 0; i < clean.size(); ++i) {
      if (adv.id(i) != clean.id(i)) return {false, a + " id mismatch at " + std::to_string(i)};
      const auto x = clean.image_values(i), y = adv.image_values(i);
      bool bad = false;
      for (std::size_t k = 0; k < x.size(); ++k) {
        const double diff = std::abs(y[k] - x[k]);
        worst = std::max(worst, diff);
        bad |= diff > 16 || y[k] < 0 || y[k] > 255 || y[k] != std::floor(y[k]);
      }
      violations += bad;
      ++checked;
    }
  }
  // White-box sanity figure, reported only.
  const auto source = models::load_checkpoint(models::checkpoint_dir(d.models, "desk_cnn", 1));
  const auto labels = io::load_images(io::load_image_folder(d.data, "val"), 100).labels;
  const auto pgd = io::load_image_dir(d.runs / "budget_pgd" / "images");
  std::size_t wrong_clean = 0, wrong_pgd = 0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    wrong_clean += source.model.predict(clean.image(i)) != labels[i];
    wrong_pgd += source.model.predict(pgd.image(i)) != labels[i];
  }
  std::cout << "# source error rate clean " << wrong_clean << "% -> pgd " << wrong_pgd << "%" << std::endl;
  return {violations == 0 && checked == 500, std::to_string(checked) + " saved images over 5 attacks, " +
                                                 std::to_string(violations) + " violations, max |x'-x| = " + fmt(worst)};
}

std::pair<bool, std::string> reduction_family(const Desk& d) {
  const auto source = models::load_checkpoint(models::checkpoint_dir(d.models, "desk_cnn", 1));
  const auto data = io::load_images(io::load_image_folder(d.data, "val"), 0);
  // Spread the ten images across classes.
  std::vector<Tensor> picks;
  std::vector<std::string> ids;
  std::vector<int> labels;
  for (std::size_t i = 0; i < data.images.size() && picks.size() < 10; i += 30) {
    picks.push_back(data.images.image(i));
    ids.push_back(data.images.id(i));
    labels.push_back(data.labels[i]);
  }
  const ImageBatch x(picks, ids);
  attack::AttackConfig cfg;
  cfg.rng_seed = 11;

  std::size_t mismatches = 0;
  auto compare = [&](const attack::AttackResult& a, const attack::AttackResult& b) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      bool same = a.adversarial.image(i) == b.adversarial.image(i) &&
                  a.traces[i].records.size() == b.traces[i].records.size();
      for (std::size_t t = 0; same && t < a.traces[i].records.size(); ++t) {
        same = a.traces[i].records[t].objective == b.traces[i].records[t].objective &&
               a.traces[i].records[t].linf == b.traces[i].records[t].linf;
      }
      mismatches += !same;
    }
  };
  auto dim0 = cfg;
  dim0.transform_prob = 0;
  compare(attack::dim_attack(x, labels, source.model, dim0), attack::mi_fgsm_attack(x, labels, source.model, cfg));
  auto mi0 = cfg;
  mi0.momentum = 0;
  compare(attack::mi_fgsm_attack(x, labels, source.model, mi0), attack::pgd_attack(x, labels, source.model, cfg));
  auto ti1 = cfg;
  ti1.ti_kernel_size = 1;
  compare(attack::ti_dim_attack(x, labels, source.model, ti1), attack::dim_attack(x, labels, source.model, cfg));
  return {mismatches == 0 && x.size() == 10,
          "3 pairs x " + std::to_string(x.size()) + " images x 100 steps, " + std::to_string(mismatches) +
              " trajectory mismatches"};
}

struct DispersionRun {
  fs::path adv_dir;
  fs::path control_dir;
};

std::pair<bool, std::string> dispersion_effect(const Desk& d, DispersionRun& run) {
  auto cfg = base_config(d);
  cfg.limit = 200;
  cfg.attack = "dr";
  cfg.attack_config.target_layer = "conv3";
  cfg.out = d.runs / "dr200";
  std::ostringstream log;
  cli::cmd_attack(cfg, log);
  run.adv_dir = cfg.out;

  const auto source = models::load_checkpoint(cli::RunConfig(cfg).checkpoint(cfg.source_model));
  const auto clean = io::load_images(io::load_image_folder(d.data, "val"), 200).images;
  const auto adv = io::load_image_dir(cfg.out / "images");
  std::size_t reduced = 0;
  double before = 0, after = 0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const double b = attack::dispersion(models::tap_features(source.model, clean.image(i), "conv3"));
    const double a = attack::dispersion(models::tap_features(source.model, adv.image(i), "conv3"));
    reduced += a < b;
    before += b;
    after += a;
  }
  const double drop = 1.0 - after / before;
  std::ostringstream os;
  os << "conv3 std reduced on " << reduced << "/" << clean.size() << " saved images; mean std " << before / clean.size()
     << " -> " << after / clean.size() << " (" << std::setprecision(3) << 100 * drop << "% reduction, need >= 30%)";
  return {reduced == clean.size() && clean.size() == 200 && drop >= 0.30, os.str()};
}

std::pair<bool, std::string> transfer_direction(const Desk& d, DispersionRun& run) {
  // Control: same pipeline with a zero budget.
  auto control = base_config(d);
  control.limit = 200;
  control.attack = "dr";
  control.attack_config.target_layer = "conv3";
  control.attack_config.epsilon = 0;
  control.attack_config.alpha = 0;
  control.out = d.runs / "dr200_eps0";
  std::ostringstream log;
  cli::cmd_attack(control, log);
  run.control_dir = control.out;

  auto cfg = base_config(d);
  cfg.limit = 200;
  cfg.adv_dirs = {run.adv_dir, run.control_dir};
  cli::TargetSpec target;
  target.model = {"desk_cnn", 2, std::nullopt};
  cfg.targets = {target};
  cfg.out = d.runs / "transfer_eval";
  cli::cmd_eval(cfg, log);
  std::ifstream in(cfg.out / "eval_report.json");
  const auto report = nlohmann::json::parse(in);
  const double adv = report["rows"][0]["adv_value"].get<double>();
  const double ctl = report["rows"][1]["adv_value"].get<double>();
  std::ostringstream os;
  os << "seed-2 relative accuracy " << adv << "% under DR from seed-1 vs " << ctl
     << "% for the eps=0 control; the DR run used no labels";
  return {adv < 100 && adv < ctl, os.str()};
}

std::pair<bool, std::string> self_reference(const Desk& d) {
  const auto clean = io::load_images(io::load_image_folder(d.data, "val"), 60).images;
  std::vector<std::unique_ptr<targets::TargetAdapter>> adapters;
  adapters.push_back(targets::local_adapter(models::checkpoint_dir(d.models, "desk_cnn", 2)));
  adapters.push_back(targets::local_adapter(models::checkpoint_dir(d.models, "desk_fcn", 1), targets::Task::detect));
  adapters.push_back(targets::local_adapter(models::checkpoint_dir(d.models, "desk_fcn", 1), targets::Task::segment));
  for (std::size_t i = 0; i < 3; ++i) {
    const fs::path dir = d.runs / ("fixture_" + std::string(targets::to_string(adapters[i]->task())));
    targets::record_fixture(*adapters[i], clean, dir, "desk-" + std::string(targets::to_string(adapters[i]->task())));
    adapters.push_back(targets::mock_api_adapter(dir));
  }
  std::ostringstream os;
  bool ok = true;
  for (const auto& a : adapters) {
    const auto s = eval::relative_eval(*a, clean, clean);
    ok &= s.adv_value == 100.0 && s.evaluated == clean.size();
    os << a->identity() << " " << s.metric_name << "=" << s.adv_value << "; ";
  }
  return {ok, os.str()};
}

std::pair<bool, std::string> determinism(const Desk& d) {
  std::ostringstream log;
  std::size_t files = 0, different = 0;
  for (std::string a : {"dr", "tidim"}) {
    auto cfg = base_config(d);
    cfg.limit = 30;
    cfg.attack = a;
    cfg.attack_config.target_layer = "conv3";
    cfg.attack_config.rng_seed = 5;
    cfg.out = d.runs / ("det_" + a + "_1");
    cli::cmd_attack(cfg, log);
    auto again = cli::load_config(cfg.out / "manifest.json");
    again.out = d.runs / ("det_" + a + "_2");
    cli::cmd_attack(again, log);
    for (const auto& e : fs::recursive_directory_iterator(cfg.out / "images")) {
      if (!e.is_regular_file()) continue;
      ++files;
      different += read_file(e.path()) != read_file(again.out / "images" / fs::relative(e.path(), cfg.out / "images"));
    }
  }
  return {files == 60 && different == 0,
          std::to_string(files) + " images from two reruns of dr and tidim manifests, " + std::to_string(different) +
              " differ"};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "drt_acceptance";

  criterion("logit_change_exactness", logit_change_exactness);
  criterion("dispersion_gradient_check", gradient_check);
  criterion("metric_oracles", metric_oracles);

  Desk desk;
  try {
    const auto t0 = std::chrono::steady_clock::now();
    desk = prepare_desk(work);
    std::cout << "# dataset and desk models ready in " << fmt(seconds_since(t0), 3) << " s" << std::endl;
  } catch (const std::exception& e) {
    std::cout << "# desk setup failed: " << e.what() << std::endl;
    for (const char* name : {"budget_invariant", "reduction_family_equivalence", "dispersion_effect",
                             "cross_model_transfer_direction", "self_reference_identity", "attack_determinism"}) {
      report(name, false, "desk setup failed");
    }
    return 1;
  }

  criterion("budget_invariant", [&] { return budget_invariant(desk); });
  criterion("reduction_family_equivalence", [&] { return reduction_family(desk); });
  DispersionRun run;
  criterion("dispersion_effect", [&] { return dispersion_effect(desk, run); });
  criterion("cross_model_transfer_direction", [&] {
    if (run.adv_dir.empty()) return std::pair<bool, std::string>{false, "dispersion run missing"};
    return transfer_direction(desk, run);
  });
  criterion("self_reference_identity", [&] { return self_reference(desk); });
  criterion("attack_determinism", [&] { return determinism(desk); });

  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
