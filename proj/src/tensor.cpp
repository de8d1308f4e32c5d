#include "drt/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "drt/errors.hpp"

namespace drt {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ')';
  return os.str();
}

Tensor::Tensor(Shape s, double fill) : shape(std::move(s)), data(shape_size(shape), fill) {}

Tensor::Tensor(Shape s, std::vector<double> values) : shape(std::move(s)), data(std::move(values)) {
  if (data.size() != shape_size(shape)) {
    throw ShapeMismatch("tensor data has " + std::to_string(data.size()) +
                        " values for shape " + shape_string(shape));
  }
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.shape != b.shape) {
    throw ShapeMismatch("shape " + shape_string(a.shape) + " vs " + shape_string(b.shape));
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

ImageBatch::ImageBatch(Tensor data, std::vector<std::string> ids)
    : data_(std::move(data)), ids_(std::move(ids)) {
  validate();
}

ImageBatch::ImageBatch(const std::vector<Tensor>& images, std::vector<std::string> ids)
    : ids_(std::move(ids)) {
  if (images.size() != ids_.size()) throw ShapeMismatch("image count does not match id count");
  if (images.empty()) return;
  const Shape& s = images.front().shape;
  if (s.size() != 3) throw ShapeMismatch("images must be (C, H, W), got " + shape_string(s));
  data_ = Tensor(Shape{images.size(), s[0], s[1], s[2]});
  const std::size_t stride = shape_size(s);
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].shape != s) throw ShapeMismatch("images in a batch must share a shape");
    std::copy(images[i].data.begin(), images[i].data.end(), data_.data.begin() + i * stride);
  }
  validate();
}

void ImageBatch::validate() const {
  if (data_.rank() != 4) throw ShapeMismatch("image batch must be rank 4, got " + shape_string(data_.shape));
  if (data_.dim(0) != ids_.size()) throw ShapeMismatch("image count does not match id count");
  for (double v : data_.data) {
    if (!(v >= 0.0 && v <= 255.0)) throw ShapeMismatch("pixel value outside [0, 255]");
  }
}

Shape ImageBatch::image_shape() const { return {data_.dim(1), data_.dim(2), data_.dim(3)}; }

std::size_t ImageBatch::image_size() const { return data_.dim(1) * data_.dim(2) * data_.dim(3); }

Tensor ImageBatch::image(std::size_t i) const {
  auto v = image_values(i);
  return Tensor(image_shape(), std::vector<double>(v.begin(), v.end()));
}

std::span<const double> ImageBatch::image_values(std::size_t i) const {
  if (i >= size()) throw std::out_of_range("image index out of range");
  const std::size_t stride = image_size();
  return std::span<const double>(data_.data).subspan(i * stride, stride);
}

void ImageBatch::set_image(std::size_t i, const Tensor& image) {
  if (image.shape != image_shape()) throw ShapeMismatch("image shape does not match batch");
  for (double v : image.data) {
    if (!(v >= 0.0 && v <= 255.0)) throw ShapeMismatch("pixel value outside [0, 255]");
  }
  std::copy(image.data.begin(), image.data.end(), data_.data.begin() + i * image_size());
}

ImageBatch ImageBatch::slice(std::size_t begin, std::size_t end) const {
  end = std::min(end, size());
  begin = std::min(begin, end);
  const std::size_t stride = image_size();
  Tensor t(Shape{end - begin, data_.dim(1), data_.dim(2), data_.dim(3)});
  std::copy(data_.data.begin() + begin * stride, data_.data.begin() + end * stride, t.data.begin());
  return ImageBatch(std::move(t), std::vector<std::string>(ids_.begin() + begin, ids_.begin() + end));
}

}  // namespace drt
