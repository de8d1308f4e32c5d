#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "drt/io/dataset.hpp"
#include "drt/models/network.hpp"

namespace drt::models {

// Four 3x3 conv blocks (conv1..conv4, each tapped after its ReLU) with 2x2
// pooling after conv2 and conv4, then a linear head.
SequentialModel build_small4conv(std::size_t image_size, std::size_t num_classes);

// Fully convolutional segmenter: four tapped 3x3 conv blocks at full
// resolution and a 1x1 head producing per-pixel logits for num_labels
// labels (background included).
SequentialModel build_desk_fcn(std::size_t image_size, std::size_t num_labels);

SequentialModel build_architecture(const std::string& arch, std::size_t image_size, std::size_t num_outputs);

struct TrainOptions {
  int epochs = 12;
  std::size_t batch_size = 32;
  double learning_rate = 0.05;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  std::uint64_t seed = 1;
  std::function<void(const std::string&)> log;
};

struct TrainReport {
  double final_train_loss = 0.0;
  double val_metric = 0.0;  // accuracy for classifiers, pixel accuracy for segmenters
  std::size_t train_size = 0;
};

// Seeded minibatch SGD with momentum. The seed controls parameter init and
// the shuffle order.
TrainReport train_classifier(SequentialModel& model, const io::LabeledImages& train, const io::LabeledImages& val,
                             const TrainOptions& opts);

struct SegmentationSamples {
  ImageBatch images;
  std::vector<std::vector<int>> masks;
};

SegmentationSamples load_segmentation_samples(const io::Dataset& dataset, std::size_t limit = 0);

TrainReport train_segmenter(SequentialModel& model, const SegmentationSamples& train, const SegmentationSamples& val,
                            const TrainOptions& opts);

double classification_accuracy(const SurrogateModel& model, const ImageBatch& images, std::span<const int> labels);

// Trains the desk classifier on dataset_dir (train split) and reports
// validation accuracy. Throws DatasetEmpty.
struct TrainedModel {
  SequentialModel model;
  TrainReport report;
  std::vector<std::string> class_names;
};

TrainedModel train_desk_cnn(const std::filesystem::path& dataset_dir, const std::string& arch, std::uint64_t seed,
                            TrainOptions opts = {});

TrainedModel train_desk_segmenter(const std::filesystem::path& dataset_dir, std::uint64_t seed, TrainOptions opts = {});

}  // namespace drt::models
