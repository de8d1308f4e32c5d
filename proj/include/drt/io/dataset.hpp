#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "drt/tensor.hpp"

namespace drt::io {

// Labeled image folder:
//   root/<split>/<class>/<stem>.ppm
//   root/masks/<split>/<class>/<stem>.pgm   (optional per-pixel labels)
// Class ids follow the sorted class directory names. Image ids are
// "<class>/<stem>".
struct DatasetItem {
  std::string id;
  std::filesystem::path image;
  int label = 0;
  std::optional<std::filesystem::path> mask;
};

struct Dataset {
  std::vector<std::string> class_names;
  std::vector<DatasetItem> items;
};

// Throws DatasetEmpty when the split has no images.
Dataset load_image_folder(const std::filesystem::path& root, std::string_view split);

struct LabeledImages {
  ImageBatch images;
  std::vector<int> labels;
};

LabeledImages load_images(const Dataset& dataset, std::size_t limit = 0);

// Every image file below dir, ids are relative paths without extension.
ImageBatch load_image_dir(const std::filesystem::path& dir);

// Writes batch images to dir/<id>.ppm, creating subdirectories.
void save_image_dir(const std::filesystem::path& dir, const ImageBatch& batch);

// Procedural shapes dataset: ten shape classes drawn with random colours,
// placement, size and pixel noise, plus per-pixel masks where 0 is
// background and class c is stored as c + 1.
struct SyntheticSpec {
  std::size_t image_size = 16;
  std::size_t train_per_class = 100;
  std::size_t val_per_class = 30;
  std::uint64_t seed = 7;
};

std::vector<std::string> synthetic_class_names();
void generate_shapes_dataset(const std::filesystem::path& root, const SyntheticSpec& spec);

}  // namespace drt::io
