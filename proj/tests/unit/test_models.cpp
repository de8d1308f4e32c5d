#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "drt/attack/dispersion.hpp"
#include "drt/errors.hpp"
#include "drt/models/checkpoint.hpp"
#include "drt/models/desk.hpp"
#include "drt/models/layers.hpp"
#include "drt/models/profiler.hpp"
#include "oracles.hpp"

using namespace drt;
using namespace drt::models;
namespace fs = std::filesystem;

namespace {

double objective_at(const SequentialModel& m, const Tensor& x, const std::string& key) {
  return attack::dispersion(tap_features(m, x, key));
}

double loss_at(const SequentialModel& m, const Tensor& x, int label) {
  const Tensor logits = m.forward(x).logits;
  std::vector<double> g(logits.size());
  return softmax_cross_entropy(logits.values(), label, g);
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("drt_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("conv2d matches a direct same-padded correlation") {
  Conv2d conv(2, 3, 3);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (auto& p : conv.params()) p = u(rng);
  Tensor x(Shape{2, 4, 5});
  for (auto& v : x.data) v = u(rng);
  Tensor y;
  conv.forward(x, y);
  REQUIRE(y.shape == Shape{3, 4, 5});
  const auto& w = conv.params();
  for (int o = 0; o < 3; ++o) {
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 5; ++c) {
        double acc = w[3 * 2 * 9 + o];
        for (int i = 0; i < 2; ++i) {
          for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
              const int yy = r + ky - 1, xx = c + kx - 1;
              if (yy < 0 || yy >= 4 || xx < 0 || xx >= 5) continue;
              acc += w[((o * 2 + i) * 3 + ky) * 3 + kx] * x[(i * 4 + yy) * 5 + xx];
            }
          }
        }
        CHECK(y[(o * 4 + r) * 5 + c] == doctest::Approx(acc).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("max pooling keeps the first maximum") {
  MaxPool2 pool;
  const Tensor x(Shape{1, 2, 4}, {1, 5, 2, 2, 5, 0, 2, 1});
  Tensor y;
  pool.forward(x, y);
  CHECK(y.data == std::vector<double>{5, 2});
  Tensor gi;
  pool.backward(x, y, Tensor(Shape{1, 1, 2}, {1, 1}), &gi, {});
  CHECK(gi.data == std::vector<double>{0, 1, 1, 0, 0, 0, 0, 0});
}

TEST_CASE("small4conv shape table") {
  const auto m = build_small4conv(16, 10);
  const auto shapes = m.shape_table();
  CHECK(m.layer_keys() == std::vector<std::string>{"conv1", "conv2", "conv3", "conv4"});
  CHECK(shapes.at("conv1") == Shape{8, 16, 16});
  CHECK(shapes.at("conv2") == Shape{16, 16, 16});
  CHECK(shapes.at("conv3") == Shape{16, 8, 8});
  CHECK(shapes.at("conv4") == Shape{32, 8, 8});
  CHECK(m.num_classes() == 10);
  CHECK_THROWS_AS(build_small4conv(18, 10), ShapeMismatch);
  CHECK_THROWS_AS(build_architecture("resnet", 16, 10), InvalidConfig);
}

TEST_CASE("tapped features feed forward_from to the same logits") {
  const auto m = oracle::tiny_classifier(3);
  const auto x = oracle::random_images(1, 8, 4).image(0);
  const Tensor logits = m.forward(x).logits;
  for (const auto& key : m.layer_keys()) {
    const auto out = m.forward(x, key);
    REQUIRE(out.feature);
    CHECK(out.feature->layer_key == key);
    CHECK(out.feature->values.shape == m.shape_table().at(key));
    CHECK(out.logits == logits);
    CHECK(m.forward_from(key, out.feature->values) == logits);
  }
  CHECK_THROWS_AS(m.forward(x, "conv9"), InvalidLayer);
  CHECK_THROWS_AS(m.forward_from("conv1", Tensor(Shape{1, 2, 2})), ShapeMismatch);
}

TEST_CASE("feature objective gradient matches finite differences") {
  const auto m = oracle::tiny_classifier(3);
  const auto x = oracle::random_images(1, 8, 5).image(0);
  for (const auto& key : m.layer_keys()) {
    Tensor grad;
    m.feature_objective(x, key, attack::dispersion_with_gradient, grad);
    REQUIRE(grad.shape == x.shape);
    for (std::size_t i = 0; i < x.size(); i += 17) {
      const double h = 1e-3;
      Tensor up = x, down = x;
      up[i] += h;
      down[i] -= h;
      const double fd = (objective_at(m, up, key) - objective_at(m, down, key)) / (2 * h);
      CHECK(fd == doctest::Approx(grad[i]).epsilon(1e-4).scale(1e-6));
    }
  }
}

TEST_CASE("classification loss gradient matches finite differences") {
  const auto m = oracle::tiny_classifier(6);
  const auto x = oracle::random_images(1, 8, 8).image(0);
  Tensor grad;
  const double loss = m.classification_loss(x, 2, grad);
  CHECK(loss == doctest::Approx(loss_at(m, x, 2)).epsilon(1e-14));
  for (std::size_t i = 0; i < x.size(); i += 13) {
    const double h = 1e-3;
    Tensor up = x, down = x;
    up[i] += h;
    down[i] -= h;
    const double fd = (loss_at(m, up, 2) - loss_at(m, down, 2)) / (2 * h);
    CHECK(fd == doctest::Approx(grad[i]).epsilon(1e-4).scale(1e-6));
  }
  CHECK_THROWS_AS(m.classification_loss(x, 4, grad), InvalidLabel);
}

TEST_CASE("parameter gradient matches finite differences") {
  for (bool dense : {false, true}) {
    SequentialModel m = dense ? build_desk_fcn(6, 3) : build_small4conv(8, 3);
    std::mt19937_64 rng(2);
    m.init_params(rng);
    const auto x = oracle::random_images(1, dense ? 6 : 8, 3).image(0);
    std::vector<int> targets = dense ? std::vector<int>(36, 0) : std::vector<int>{1};
    if (dense) {
      for (std::size_t p = 0; p < targets.size(); ++p) targets[p] = static_cast<int>(p % 3);
    }
    const std::vector<double> weights = dense ? std::vector<double>{0.5, 1.0, 2.0} : std::vector<double>{};
    std::vector<double> grad(m.param_count(), 0.0);
    m.loss_and_param_grad(x, targets, grad, weights);
    auto params = m.flat_params();
    std::vector<double> scratch(m.param_count());
    for (std::size_t i = 0; i < params.size(); i += params.size() / 23) {
      const double h = 1e-6;
      auto p = params;
      p[i] += h;
      m.set_flat_params(p);
      const double up = m.loss_and_param_grad(x, targets, scratch, weights);
      p[i] -= 2 * h;
      m.set_flat_params(p);
      const double down = m.loss_and_param_grad(x, targets, scratch, weights);
      CHECK((up - down) / (2 * h) == doctest::Approx(grad[i]).epsilon(1e-4).scale(1e-7));
    }
    m.set_flat_params(params);
  }
}

TEST_CASE("checkpoint round trip preserves the model exactly") {
  const fs::path root = temp_dir("ckpt");
  auto m = oracle::tiny_classifier(9);
  m.set_name("desk_cnn");
  ModelMeta meta;
  meta.name = "desk_cnn";
  meta.seed = 3;
  meta.arch = "small4conv";
  meta.image_size = 8;
  meta.num_outputs = 4;
  meta.class_names = {"a", "b", "c", "d"};
  meta.val_metric = 0.5;
  const fs::path dir = save_checkpoint(root, m, meta);
  CHECK(dir == checkpoint_dir(root, "desk_cnn", 3));
  const auto loaded = load_checkpoint(dir);
  CHECK(loaded.model.name() == "desk_cnn@3");
  CHECK(loaded.meta.class_names == meta.class_names);
  CHECK(loaded.meta.layer_keys == m.layer_keys());
  CHECK(loaded.meta.shapes.at("conv3") == m.shape_table().at("conv3"));
  CHECK(loaded.model.flat_params() == m.flat_params());
  const auto x = oracle::random_images(1, 8, 1).image(0);
  CHECK(loaded.model.forward(x).logits == m.forward(x).logits);

  CHECK_THROWS_AS(load_checkpoint(root / "missing"), LoadFailure);
  {
    std::ofstream(dir / "weights", std::ios::binary) << "garbage";
  }
  CHECK_THROWS_AS(load_checkpoint(dir), LoadFailure);
  fs::remove_all(root);
}

TEST_CASE("training is reproducible under a seed") {
  const fs::path root = temp_dir("train");
  io::SyntheticSpec spec;
  spec.image_size = 8;
  spec.train_per_class = 4;
  spec.val_per_class = 2;
  io::generate_shapes_dataset(root, spec);
  TrainOptions opts;
  opts.epochs = 2;
  const auto a = train_desk_cnn(root, "small4conv", 1, opts);
  const auto b = train_desk_cnn(root, "small4conv", 1, opts);
  const auto c = train_desk_cnn(root, "small4conv", 2, opts);
  CHECK(a.model.flat_params() == b.model.flat_params());
  CHECK_FALSE(a.model.flat_params() == c.model.flat_params());
  CHECK(a.class_names.size() == 10);
  CHECK(a.report.train_size == 40);
  const auto seg = train_desk_segmenter(root, 1, opts);
  CHECK(seg.class_names.front() == "background");
  CHECK(seg.model.num_classes() == 11);
  CHECK(seg.model.head() == Head::dense);
  fs::remove_all(root);
}

TEST_CASE("layer profile on a single-layer model") {
  models::IdentityModel id;
  attack::AttackConfig cfg;
  cfg.steps = 5;
  const ImageBatch probe(Tensor(Shape{2, 1, 1, 3}, {0, 10, 50, 100, 100, 130}), {"a", "b"});
  const auto prof = profile_layers(id, probe, cfg);
  REQUIRE(prof.rows.size() == 1);
  CHECK(prof.rows[0].layer == "input");
  CHECK(prof.recommended == "input");
  CHECK(prof.rows[0].std_before == doctest::Approx((oracle::sample_std({0, 10, 50}) + oracle::sample_std({100, 100, 130})) / 2));
  CHECK(prof.rows[0].delta == doctest::Approx(prof.rows[0].std_before - prof.rows[0].std_after));
  CHECK(prof.rows[0].delta > 0);
  CHECK(prof.rows[0].per_image_before.size() == 2);
}

TEST_CASE("layer profile recommends the largest reduction") {
  const auto m = oracle::tiny_classifier(3);
  const auto probe = oracle::random_images(2, 8, 1);
  attack::AttackConfig cfg;
  cfg.steps = 4;
  int calls = 0;
  const auto prof = profile_layers(m, probe, cfg, [&](const std::string&, const ImageBatch&) { return ++calls; });
  REQUIRE(prof.rows.size() == 4);
  auto best = prof.rows.front();
  for (const auto& r : prof.rows) {
    if (r.delta > best.delta) best = r;
    REQUIRE(r.downstream_metric);
  }
  CHECK(prof.recommended == best.layer);
  CHECK(calls == 4);
}
