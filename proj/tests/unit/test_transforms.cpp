#include <doctest.h>

#include <numeric>
#include <random>

#include "drt/attack/transforms.hpp"
#include "drt/errors.hpp"

using namespace drt;
using namespace drt::attack;

namespace {

Tensor random_tensor(Shape s, std::uint64_t seed) {
  Tensor t(std::move(s));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  for (auto& v : t.data) v = u(rng);
  return t;
}

double dot(const Tensor& a, const Tensor& b) { return std::inner_product(a.data.begin(), a.data.end(), b.data.begin(), 0.0); }

}  // namespace

TEST_CASE("resize-pad backward is the adjoint of apply") {
  const Shape shape{3, 7, 7};
  for (std::size_t side = 1; side <= 7; ++side) {
    ResizePad t{side, side, (7 - side) / 2, 7 - side};
    const Tensor x = random_tensor(shape, side);
    const Tensor g = random_tensor(shape, side + 100);
    CHECK(dot(t.apply(x), g) == doctest::Approx(dot(x, t.backward(g, shape))).epsilon(1e-12));
  }
}

TEST_CASE("full-size resize-pad at the origin is the identity") {
  const Shape shape{1, 4, 4};
  const ResizePad t{4, 4, 0, 0};
  CHECK(t.is_identity(shape));
  const Tensor x = random_tensor(shape, 1);
  CHECK(t.apply(x) == x);
  CHECK_FALSE((ResizePad{3, 3, 0, 0}.is_identity(shape)));
}

TEST_CASE("resize-pad hand case") {
  // 4x4 -> 2x2 nearest picks rows/cols 0 and 2, placed at (1, 2).
  Tensor x(Shape{1, 4, 4});
  std::iota(x.data.begin(), x.data.end(), 1.0);
  const Tensor y = ResizePad{2, 2, 1, 2}.apply(x);
  const std::vector<double> expect{0, 0, 0, 0, 0, 0, 1, 3, 0, 0, 9, 11, 0, 0, 0, 0};
  CHECK(y.data == expect);
  CHECK_THROWS_AS((ResizePad{3, 3, 2, 0}.apply(x)), ShapeMismatch);
}

TEST_CASE("sampling respects the probability and size range") {
  AttackRng rng(3);
  int fired = 0;
  for (int i = 0; i < 2000; ++i) {
    auto t = sample_resize_pad(rng, Shape{3, 20, 20}, 0.5, 0.9, 1.0);
    if (!t) continue;
    ++fired;
    CHECK(t->size_h >= 18);
    CHECK(t->size_h <= 20);
    CHECK(t->size_w == t->size_h);
    CHECK(t->top + t->size_h <= 20);
    CHECK(t->left + t->size_w <= 20);
  }
  CHECK(fired > 850);
  CHECK(fired < 1150);
  AttackRng never(4);
  for (int i = 0; i < 100; ++i) CHECK_FALSE(sample_resize_pad(never, Shape{3, 8, 8}, 0.0, 0.5, 1.0));
}

TEST_CASE("the coin is consumed even when the transform cannot fire") {
  AttackRng a(17), b(17);
  (void)sample_resize_pad(a, Shape{1, 8, 8}, 0.0, 0.9, 1.0);
  (void)b.uniform01();
  CHECK(a.uniform01() == b.uniform01());
}

TEST_CASE("uniform draws stay in range") {
  AttackRng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform01();
    CHECK((u >= 0 && u < 1));
    const auto k = rng.uniform_index(2, 4);
    CHECK((k >= 2 && k <= 4));
  }
}

TEST_CASE("gaussian kernel is normalized and symmetric") {
  for (int size : {1, 3, 5, 15}) {
    const auto k = gaussian_kernel(size);
    CHECK(std::accumulate(k.begin(), k.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        CHECK(k[y * size + x] == doctest::Approx(k[x * size + y]).epsilon(1e-15));
        CHECK(k[y * size + x] == doctest::Approx(k[(size - 1 - y) * size + x]).epsilon(1e-15));
      }
    }
  }
  CHECK(gaussian_kernel(1) == std::vector<double>{1.0});
  // sigma = 1/2 for size 3: corner / center = exp(-2 / (2 * 0.25)) = exp(-4).
  const auto k3 = gaussian_kernel(3);
  CHECK(k3[0] / k3[4] == doctest::Approx(std::exp(-4.0)).epsilon(1e-14));
  CHECK_THROWS_AS(gaussian_kernel(2), InvalidConfig);
}

TEST_CASE("convolution with zero padding") {
  Tensor x(Shape{1, 3, 3});
  x[4] = 1;  // centered delta reproduces the kernel
  const auto k = gaussian_kernel(3);
  CHECK(convolve_same(x, k, 3).data == k);
  const Tensor r = random_tensor(Shape{2, 5, 4}, 8);
  CHECK(convolve_same(r, {1.0}, 1) == r);
  // Border pixel of a constant image loses the mass that falls outside.
  Tensor ones(Shape{1, 3, 3}, 1.0);
  const Tensor c = convolve_same(ones, k, 3);
  CHECK(c[0] == doctest::Approx(k[4] + k[5] + k[7] + k[8]).epsilon(1e-14));
}
