#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace drt {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

// Dense row-major tensor of doubles. Images are stored (C, H, W) and batches
// (N, C, H, W), always in pixel units.
struct Tensor {
  Shape shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(Shape s, double fill = 0.0);
  Tensor(Shape s, std::vector<double> values);

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }

  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  std::span<double> values() { return data; }
  std::span<const double> values() const { return data; }

  bool operator==(const Tensor&) const = default;
};

// Largest absolute elementwise difference; throws ShapeMismatch.
double max_abs_diff(const Tensor& a, const Tensor& b);

// Batch of images in [0, 255] with per-image identifiers.
class ImageBatch {
 public:
  ImageBatch() = default;
  ImageBatch(Tensor data, std::vector<std::string> ids);
  ImageBatch(const std::vector<Tensor>& images, std::vector<std::string> ids);

  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  const Shape& shape() const { return data_.shape; }
  Shape image_shape() const;
  std::size_t image_size() const;

  const Tensor& tensor() const { return data_; }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::string& id(std::size_t i) const { return ids_.at(i); }

  Tensor image(std::size_t i) const;
  std::span<const double> image_values(std::size_t i) const;
  void set_image(std::size_t i, const Tensor& image);

  ImageBatch slice(std::size_t begin, std::size_t end) const;

  bool operator==(const ImageBatch&) const = default;

 private:
  void validate() const;

  Tensor data_{Shape{0, 0, 0, 0}};
  std::vector<std::string> ids_;
};

// Activation tensor captured at a named layer of a surrogate.
struct FeatureMap {
  std::string layer_key;
  Tensor values;

  std::size_t size() const { return values.size(); }
};

}  // namespace drt
