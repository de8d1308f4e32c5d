#include "drt/models/desk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "drt/errors.hpp"
#include "drt/io/image_io.hpp"

namespace drt::models {

SequentialModel build_small4conv(std::size_t image_size, std::size_t num_classes) {
  if (image_size % 4 != 0) throw ShapeMismatch("small4conv needs an image size divisible by 4");
  SequentialModel m("small4conv", Shape{3, image_size, image_size});
  m.add(std::make_unique<PixelNormalize>());
  m.add(std::make_unique<Conv2d>(3, 8, 3)).add(std::make_unique<Relu>(), "conv1");
  m.add(std::make_unique<Conv2d>(8, 16, 3)).add(std::make_unique<Relu>(), "conv2");
  m.add(std::make_unique<MaxPool2>());
  m.add(std::make_unique<Conv2d>(16, 16, 3)).add(std::make_unique<Relu>(), "conv3");
  m.add(std::make_unique<Conv2d>(16, 32, 3)).add(std::make_unique<Relu>(), "conv4");
  m.add(std::make_unique<MaxPool2>());
  const std::size_t side = image_size / 4;
  m.add(std::make_unique<Linear>(32 * side * side, num_classes));
  return m;
}

SequentialModel build_desk_fcn(std::size_t image_size, std::size_t num_labels) {
  SequentialModel m("desk_fcn", Shape{3, image_size, image_size}, Head::dense);
  m.add(std::make_unique<PixelNormalize>());
  m.add(std::make_unique<Conv2d>(3, 12, 3)).add(std::make_unique<Relu>(), "conv1");
  m.add(std::make_unique<Conv2d>(12, 16, 3)).add(std::make_unique<Relu>(), "conv2");
  m.add(std::make_unique<Conv2d>(16, 16, 3)).add(std::make_unique<Relu>(), "conv3");
  m.add(std::make_unique<Conv2d>(16, 16, 3)).add(std::make_unique<Relu>(), "conv4");
  m.add(std::make_unique<Conv2d>(16, num_labels, 1));
  return m;
}

SequentialModel build_architecture(const std::string& arch, std::size_t image_size, std::size_t num_outputs) {
  if (arch == "small4conv") return build_small4conv(image_size, num_outputs);
  if (arch == "desk_fcn") return build_desk_fcn(image_size, num_outputs);
  throw InvalidConfig("arch", "unknown architecture '" + arch + "' (expected small4conv or desk_fcn)");
}

namespace {

// Shared SGD loop. sample_grad(i, grad) accumulates the gradient of sample i
// and returns its loss.
template <typename SampleGrad>
double sgd_epochs(SequentialModel& model, std::size_t n, const TrainOptions& opts, SampleGrad sample_grad,
                  const std::function<void(int, double)>& on_epoch) {
  std::mt19937_64 rng(opts.seed);
  model.init_params(rng);
  std::vector<double> params = model.flat_params();
  std::vector<double> grad(params.size()), velocity(params.size(), 0.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  double epoch_loss = 0.0;
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    // Step decay over the last third of training.
    const double lr = epoch >= (2 * opts.epochs) / 3 ? opts.learning_rate * 0.2 : opts.learning_rate;
    epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += opts.batch_size) {
      const std::size_t end = std::min(n, start + opts.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t b = start; b < end; ++b) epoch_loss += sample_grad(order[b], grad);
      const double scale = 1.0 / static_cast<double>(end - start);
      for (std::size_t p = 0; p < params.size(); ++p) {
        const double g = grad[p] * scale + opts.weight_decay * params[p];
        velocity[p] = opts.momentum * velocity[p] - lr * g;
        params[p] += velocity[p];
      }
      model.set_flat_params(params);
    }
    epoch_loss /= static_cast<double>(n);
    if (on_epoch) on_epoch(epoch, epoch_loss);
  }
  return epoch_loss;
}

void log_line(const TrainOptions& opts, const std::string& line) {
  if (opts.log) opts.log(line);
}

}  // namespace

double classification_accuracy(const SurrogateModel& model, const ImageBatch& images, std::span<const int> labels) {
  if (images.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < images.size(); ++i) correct += model.predict(images.image(i)) == labels[i];
  return static_cast<double>(correct) / static_cast<double>(images.size());
}

TrainReport train_classifier(SequentialModel& model, const io::LabeledImages& train, const io::LabeledImages& val,
                             const TrainOptions& opts) {
  if (train.images.empty()) throw DatasetEmpty("no training images");
  TrainReport report;
  report.train_size = train.images.size();
  std::vector<Tensor> images;
  for (std::size_t i = 0; i < train.images.size(); ++i) images.push_back(train.images.image(i));
  report.final_train_loss = sgd_epochs(
      model, images.size(), opts,
      [&](std::size_t i, std::vector<double>& grad) {
        const int label = train.labels[i];
        return model.loss_and_param_grad(images[i], std::span<const int>(&label, 1), grad);
      },
      [&](int epoch, double loss) {
        std::ostringstream os;
        os << "epoch " << epoch + 1 << "/" << opts.epochs << " loss " << loss;
        log_line(opts, os.str());
      });
  report.val_metric = classification_accuracy(model, val.images, val.labels);
  std::ostringstream os;
  os << "validation accuracy " << report.val_metric;
  log_line(opts, os.str());
  return report;
}

SegmentationSamples load_segmentation_samples(const io::Dataset& dataset, std::size_t limit) {
  const std::size_t n = limit ? std::min(limit, dataset.items.size()) : dataset.items.size();
  std::vector<Tensor> images;
  std::vector<std::string> ids;
  SegmentationSamples out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& item = dataset.items[i];
    if (!item.mask) throw DatasetEmpty("image '" + item.id + "' has no mask");
    images.push_back(io::read_image(item.image));
    ids.push_back(item.id);
    const auto mask = io::read_gray(*item.mask);
    out.masks.emplace_back(mask.pixels.begin(), mask.pixels.end());
  }
  out.images = ImageBatch(images, std::move(ids));
  return out;
}

TrainReport train_segmenter(SequentialModel& model, const SegmentationSamples& train, const SegmentationSamples& val,
                            const TrainOptions& opts) {
  if (train.images.empty()) throw DatasetEmpty("no training images");
  TrainReport report;
  report.train_size = train.images.size();
  std::vector<Tensor> images;
  for (std::size_t i = 0; i < train.images.size(); ++i) images.push_back(train.images.image(i));
  // Background dominates the masks; weight labels by inverse square-root
  // frequency so the segmenter does not settle on all-background.
  const std::size_t k = model.num_classes();
  std::vector<double> freq(k, 0.0), weights(k, 0.0);
  for (const auto& m : train.masks) {
    for (int t : m) freq.at(static_cast<std::size_t>(t)) += 1.0;
  }
  const double max_freq = *std::max_element(freq.begin(), freq.end());
  for (std::size_t c = 0; c < k; ++c) weights[c] = freq[c] > 0 ? std::sqrt(max_freq / freq[c]) : 0.0;
  report.final_train_loss = sgd_epochs(
      model, images.size(), opts,
      [&](std::size_t i, std::vector<double>& grad) {
        return model.loss_and_param_grad(images[i], train.masks[i], grad, weights);
      },
      [&](int epoch, double loss) {
        std::ostringstream os;
        os << "epoch " << epoch + 1 << "/" << opts.epochs << " loss " << loss;
        log_line(opts, os.str());
      });
  std::size_t correct = 0, total = 0;
  for (std::size_t i = 0; i < val.images.size(); ++i) {
    const Tensor out = model.forward(val.images.image(i)).logits;
    const std::size_t k = out.dim(0), plane = out.dim(1) * out.dim(2);
    for (std::size_t p = 0; p < plane; ++p) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < k; ++c) {
        if (out[c * plane + p] > out[best * plane + p]) best = c;
      }
      correct += static_cast<int>(best) == val.masks[i][p];
      ++total;
    }
  }
  report.val_metric = total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
  std::ostringstream os;
  os << "validation pixel accuracy " << report.val_metric;
  log_line(opts, os.str());
  return report;
}

TrainedModel train_desk_cnn(const std::filesystem::path& dataset_dir, const std::string& arch, std::uint64_t seed,
                            TrainOptions opts) {
  const auto train_set = io::load_image_folder(dataset_dir, "train");
  const auto val_set = io::load_image_folder(dataset_dir, "val");
  const auto train = io::load_images(train_set);
  const auto val = io::load_images(val_set);
  opts.seed = seed;
  SequentialModel model =
      build_architecture(arch, train.images.image_shape()[1], train_set.class_names.size());
  model.set_name("desk_cnn");
  TrainedModel out{std::move(model), {}, train_set.class_names};
  out.report = train_classifier(out.model, train, val, opts);
  return out;
}

TrainedModel train_desk_segmenter(const std::filesystem::path& dataset_dir, std::uint64_t seed, TrainOptions opts) {
  const auto train_set = io::load_image_folder(dataset_dir, "train");
  const auto val_set = io::load_image_folder(dataset_dir, "val");
  const auto train = load_segmentation_samples(train_set);
  const auto val = load_segmentation_samples(val_set);
  opts.seed = seed;
  std::vector<std::string> labels{"background"};
  labels.insert(labels.end(), train_set.class_names.begin(), train_set.class_names.end());
  SequentialModel model = build_desk_fcn(train.images.image_shape()[1], labels.size());
  TrainedModel out{std::move(model), {}, labels};
  out.report = train_segmenter(out.model, train, val, opts);
  return out;
}

}  // namespace drt::models
