#include "drt/models/network.hpp"

#include <cmath>

#include "drt/errors.hpp"

namespace drt::models {

SequentialModel::SequentialModel(std::string name, Shape input_shape, Head head)
    : name_(std::move(name)), input_shape_(std::move(input_shape)), head_(head) {}

SequentialModel::SequentialModel(const SequentialModel& other)
    : name_(other.name_),
      input_shape_(other.input_shape_),
      head_(other.head_),
      keys_(other.keys_),
      taps_(other.taps_) {
  layers_.reserve(other.layers_.size());
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

SequentialModel& SequentialModel::operator=(const SequentialModel& other) {
  if (this != &other) *this = SequentialModel(other);
  return *this;
}

SequentialModel& SequentialModel::add(std::unique_ptr<Layer> layer, std::string tap) {
  layers_.push_back(std::move(layer));
  if (!tap.empty()) {
    if (taps_.count(tap)) throw InvalidLayer("duplicate tap '" + tap + "'");
    taps_.emplace(tap, layers_.size() - 1);
    keys_.push_back(std::move(tap));
  }
  return *this;
}

std::size_t SequentialModel::num_classes() const {
  Shape s = input_shape_;
  for (const auto& l : layers_) s = l->output_shape(s);
  return s.empty() ? 0 : s[0];
}

std::size_t SequentialModel::tap_index(std::string_view key) const {
  auto it = taps_.find(key);
  if (it == taps_.end()) throw InvalidLayer("model '" + name_ + "' has no layer '" + std::string(key) + "'");
  return it->second;
}

void SequentialModel::run(const Tensor& image, std::size_t last, std::vector<Tensor>& acts) const {
  if (image.shape != input_shape_) {
    throw ShapeMismatch("model '" + name_ + "' expects input " + shape_string(input_shape_) + ", got " +
                        shape_string(image.shape));
  }
  acts.resize(last + 2);
  acts[0] = image;
  for (std::size_t i = 0; i <= last; ++i) layers_[i]->forward(acts[i], acts[i + 1]);
}

void SequentialModel::backprop(std::vector<Tensor>& acts, std::size_t from, Tensor grad, Tensor* input_grad,
                               std::span<double> param_grad) const {
  // Parameter offsets of each layer inside the flat gradient.
  std::vector<std::size_t> offsets(layers_.size() + 1, 0);
  for (std::size_t i = 0; i < layers_.size(); ++i) offsets[i + 1] = offsets[i] + layers_[i]->params().size();
  Tensor next;
  for (std::size_t i = from + 1; i-- > 0;) {
    std::span<double> pg;
    if (!param_grad.empty()) pg = param_grad.subspan(offsets[i], layers_[i]->params().size());
    const bool need_input = i > 0 || input_grad != nullptr;
    layers_[i]->backward(acts[i], acts[i + 1], grad, need_input ? &next : nullptr, pg);
    if (!need_input) return;
    std::swap(grad, next);
  }
  if (input_grad) *input_grad = std::move(grad);
}

ForwardOutput SequentialModel::forward(const Tensor& image, std::optional<std::string_view> tap) const {
  std::vector<Tensor> acts;
  run(image, layers_.size() - 1, acts);
  ForwardOutput out;
  if (tap) {
    const std::size_t idx = tap_index(*tap);
    out.feature = FeatureMap{std::string(*tap), acts[idx + 1]};
  }
  out.logits = std::move(acts.back());
  return out;
}

double SequentialModel::feature_objective(const Tensor& image, std::string_view key,
                                          const FeatureObjective& objective, Tensor& input_grad) const {
  const std::size_t idx = tap_index(key);
  std::vector<Tensor> acts;
  run(image, idx, acts);
  Tensor grad(acts[idx + 1].shape);
  const double value = objective(acts[idx + 1].values(), grad.values());
  backprop(acts, idx, std::move(grad), &input_grad, {});
  return value;
}

double SequentialModel::classification_loss(const Tensor& image, int label, Tensor& input_grad) const {
  if (head_ != Head::classifier) throw InvalidLabel("model '" + name_ + "' is not a classifier");
  std::vector<Tensor> acts;
  run(image, layers_.size() - 1, acts);
  Tensor grad(acts.back().shape);
  const double loss = softmax_cross_entropy(acts.back().values(), label, grad.values());
  backprop(acts, layers_.size() - 1, std::move(grad), &input_grad, {});
  return loss;
}

Tensor SequentialModel::forward_from(std::string_view key, const Tensor& feature) const {
  const std::size_t idx = tap_index(key);
  Tensor cur = feature, next;
  for (std::size_t i = idx + 1; i < layers_.size(); ++i) {
    layers_[i]->forward(cur, next);
    std::swap(cur, next);
  }
  return cur;
}

std::map<std::string, Shape> SequentialModel::shape_table() const {
  std::map<std::string, Shape> table;
  Shape s = input_shape_;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    s = layers_[i]->output_shape(s);
    for (const auto& [key, idx] : taps_) {
      if (idx == i) table[key] = s;
    }
  }
  return table;
}

double SequentialModel::loss_and_param_grad(const Tensor& image, std::span<const int> targets,
                                            std::span<double> param_grad,
                                            std::span<const double> class_weights) const {
  std::vector<Tensor> acts;
  run(image, layers_.size() - 1, acts);
  const Tensor& out = acts.back();
  Tensor grad(out.shape);
  double loss = 0.0;
  if (head_ == Head::classifier) {
    if (targets.size() != 1) throw InvalidLabel("classifier training expects one label");
    loss = softmax_cross_entropy(out.values(), targets[0], grad.values());
  } else {
    // Per-pixel softmax over channels, averaged over pixels.
    const std::size_t k = out.dim(0), plane = out.dim(1) * out.dim(2);
    if (targets.size() != plane) throw InvalidLabel("dense training expects one label per pixel");
    if (!class_weights.empty() && class_weights.size() != k) throw ShapeMismatch("one weight per class expected");
    auto weight = [&](int t) { return class_weights.empty() ? 1.0 : class_weights[static_cast<std::size_t>(t)]; };
    double total = 0.0;
    for (std::size_t p = 0; p < plane; ++p) {
      if (targets[p] < 0 || static_cast<std::size_t>(targets[p]) >= k) throw InvalidLabel("pixel label out of range");
      total += weight(targets[p]);
    }
    std::vector<double> logits(k), g(k);
    for (std::size_t p = 0; p < plane; ++p) {
      const double scale = weight(targets[p]) / total;
      for (std::size_t c = 0; c < k; ++c) logits[c] = out[c * plane + p];
      loss += softmax_cross_entropy(logits, targets[p], g) * scale;
      for (std::size_t c = 0; c < k; ++c) grad[c * plane + p] = g[c] * scale;
    }
  }
  backprop(acts, layers_.size() - 1, std::move(grad), nullptr, param_grad);
  return loss;
}

std::size_t SequentialModel::param_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l->params().size();
  return n;
}

std::vector<double> SequentialModel::flat_params() const {
  std::vector<double> flat;
  flat.reserve(param_count());
  for (const auto& l : layers_) flat.insert(flat.end(), l->params().begin(), l->params().end());
  return flat;
}

void SequentialModel::set_flat_params(std::span<const double> values) {
  if (values.size() != param_count()) {
    throw ShapeMismatch("expected " + std::to_string(param_count()) + " parameters, got " +
                        std::to_string(values.size()));
  }
  std::size_t off = 0;
  for (auto& l : layers_) {
    auto& p = l->params();
    std::copy(values.begin() + off, values.begin() + off + p.size(), p.begin());
    off += p.size();
  }
}

void SequentialModel::init_params(std::mt19937_64& rng) {
  for (auto& l : layers_) {
    std::size_t fan_in = 0, weights = 0;
    if (auto* conv = dynamic_cast<Conv2d*>(l.get())) {
      fan_in = conv->in_channels() * conv->kernel() * conv->kernel();
      weights = conv->weight_count();
    } else if (auto* lin = dynamic_cast<Linear*>(l.get())) {
      fan_in = lin->in_features();
      weights = lin->in_features() * lin->out_features();
    } else {
      continue;
    }
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
    auto& p = l->params();
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = i < weights ? dist(rng) : 0.0;
  }
}

}  // namespace drt::models
