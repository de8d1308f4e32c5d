#include "drt/io/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "drt/errors.hpp"
#include "drt/io/image_io.hpp"

namespace drt::io {

namespace fs = std::filesystem;

namespace {

bool is_image_file(const fs::path& p) {
  const auto ext = p.extension().string();
  return ext == ".ppm" || ext == ".pgm";
}

std::vector<fs::path> sorted_entries(const fs::path& dir, bool directories) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (directories ? e.is_directory() : (e.is_regular_file() && is_image_file(e.path()))) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

Dataset load_image_folder(const fs::path& root, std::string_view split) {
  const fs::path dir = root / split;
  if (!fs::is_directory(dir)) throw DatasetEmpty("no split directory '" + dir.string() + "'");
  Dataset ds;
  for (const auto& class_dir : sorted_entries(dir, true)) {
    const int label = static_cast<int>(ds.class_names.size());
    const std::string cls = class_dir.filename().string();
    ds.class_names.push_back(cls);
    for (const auto& file : sorted_entries(class_dir, false)) {
      DatasetItem item;
      item.id = cls + "/" + file.stem().string();
      item.image = file;
      item.label = label;
      const fs::path mask = root / "masks" / split / cls / (file.stem().string() + ".pgm");
      if (fs::exists(mask)) item.mask = mask;
      ds.items.push_back(std::move(item));
    }
  }
  if (ds.items.empty()) throw DatasetEmpty("no images under '" + dir.string() + "'");
  return ds;
}

LabeledImages load_images(const Dataset& dataset, std::size_t limit) {
  const std::size_t n = limit ? std::min(limit, dataset.items.size()) : dataset.items.size();
  std::vector<Tensor> images;
  std::vector<std::string> ids;
  std::vector<int> labels;
  for (std::size_t i = 0; i < n; ++i) {
    images.push_back(read_image(dataset.items[i].image));
    ids.push_back(dataset.items[i].id);
    labels.push_back(dataset.items[i].label);
  }
  return {ImageBatch(images, std::move(ids)), std::move(labels)};
}

ImageBatch load_image_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw LoadFailure("no image directory '" + dir.string() + "'");
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && is_image_file(e.path())) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Tensor> images;
  std::vector<std::string> ids;
  for (const auto& f : files) {
    images.push_back(read_image(f));
    ids.push_back(fs::relative(f, dir).replace_extension().generic_string());
  }
  return ImageBatch(images, std::move(ids));
}

void save_image_dir(const fs::path& dir, const ImageBatch& batch) {
  for (std::size_t i = 0; i < batch.size(); ++i) write_image(dir / (batch.id(i) + ".ppm"), batch.image(i));
}

std::vector<std::string> synthetic_class_names() {
  return {"c0_square", "c1_frame", "c2_disk", "c3_ring", "c4_triangle",
          "c5_plus", "c6_cross", "c7_hbars", "c8_vbars", "c9_diamond"};
}

namespace {

// Whether pixel offset (dx, dy) from the shape centre belongs to shape `cls`
// of half-size r.
bool inside(int cls, double dx, double dy, double r) {
  const double ax = std::abs(dx), ay = std::abs(dy);
  const double t = std::max(1.0, r / 3.0);
  const bool in_square = ax <= r && ay <= r;
  switch (cls) {
    case 0: return in_square;
    case 1: return in_square && !(ax <= r - t && ay <= r - t);
    case 2: return dx * dx + dy * dy <= r * r;
    case 3: return dx * dx + dy * dy <= r * r && dx * dx + dy * dy > (r - t) * (r - t);
    case 4: return dy >= -r && dy <= r && ax <= (dy + r) / 2.0;
    case 5: return (ax <= t / 1.5 && ay <= r) || (ay <= t / 1.5 && ax <= r);
    case 6: return in_square && std::abs(ax - ay) <= t / 1.5;
    case 7: return in_square && static_cast<int>(std::floor((dy + r) / 2.0)) % 2 == 0;
    case 8: return in_square && static_cast<int>(std::floor((dx + r) / 2.0)) % 2 == 0;
    case 9: return ax + ay <= r;
    default: return false;
  }
}

void render(int cls, std::size_t size, std::mt19937_64& rng, Tensor& image, GrayImage& mask) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double s = static_cast<double>(size);
  const double r = s * (0.22 + 0.16 * unit(rng));
  const double cx = r + 0.5 + (s - 2 * r - 1.0) * unit(rng);
  const double cy = r + 0.5 + (s - 2 * r - 1.0) * unit(rng);

  double bg[3], fg[3];
  for (;;) {
    double diff = 0.0;
    for (int c = 0; c < 3; ++c) {
      bg[c] = 255.0 * unit(rng);
      fg[c] = 255.0 * unit(rng);
      diff += std::abs(bg[c] - fg[c]);
    }
    if (diff >= 150.0) break;
  }
  std::normal_distribution<double> noise(0.0, 8.0);
  image = Tensor(Shape{3, size, size});
  mask = GrayImage{size, size, std::vector<std::uint8_t>(size * size, 0)};
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      const bool on = inside(cls, static_cast<double>(x) + 0.5 - cx, static_cast<double>(y) + 0.5 - cy, r);
      if (on) mask.pixels[y * size + x] = static_cast<std::uint8_t>(cls + 1);
      for (int c = 0; c < 3; ++c) {
        const double v = (on ? fg[c] : bg[c]) + noise(rng);
        image[(c * size + y) * size + x] = std::clamp(std::nearbyint(v), 0.0, 255.0);
      }
    }
  }
}

}  // namespace

void generate_shapes_dataset(const fs::path& root, const SyntheticSpec& spec) {
  if (spec.image_size < 8 || spec.image_size % 4 != 0) {
    throw InvalidConfig("image_size", "must be a multiple of 4 and at least 8");
  }
  const auto names = synthetic_class_names();
  std::mt19937_64 rng(spec.seed);
  for (const auto& [split, per_class] : {std::pair<std::string, std::size_t>{"train", spec.train_per_class},
                                         std::pair<std::string, std::size_t>{"val", spec.val_per_class}}) {
    for (std::size_t k = 0; k < per_class; ++k) {
      for (int cls = 0; cls < static_cast<int>(names.size()); ++cls) {
        Tensor image;
        GrayImage mask;
        render(cls, spec.image_size, rng, image, mask);
        char stem[32];
        std::snprintf(stem, sizeof stem, "%05zu", k);
        write_image(root / split / names[cls] / (std::string(stem) + ".ppm"), image);
        write_gray(root / "masks" / split / names[cls] / (std::string(stem) + ".pgm"), mask);
      }
    }
  }
}

}  // namespace drt::io
