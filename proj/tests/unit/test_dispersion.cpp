#include <doctest.h>

#include <cmath>
#include <random>

#include "drt/attack/dispersion.hpp"
#include "drt/errors.hpp"
#include "oracles.hpp"

using drt::attack::dispersion;
using drt::attack::dispersion_with_gradient;

TEST_CASE("dispersion of a constant map is zero") {
  const std::vector<double> v{2, 2, 2, 2};
  CHECK(dispersion(v) == 0.0);
  std::vector<double> g(4, 7.0);
  CHECK(dispersion_with_gradient(v, g) == 0.0);
  for (double x : g) CHECK(x == 0.0);
}

TEST_CASE("dispersion uses the n-1 denominator") {
  CHECK(dispersion(std::vector<double>{0, 2}) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  const std::vector<double> v{1, 2, 3, 4};
  CHECK(dispersion(v) == doctest::Approx(oracle::sample_std(v)).epsilon(1e-14));
  CHECK(dispersion(v) == doctest::Approx(1.2909944487358056).epsilon(1e-14));
}

TEST_CASE("dispersion over a feature map flattens every axis") {
  drt::FeatureMap fm{"conv1", drt::Tensor(drt::Shape{2, 2, 3})};
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (auto& x : fm.values.data) x = nd(rng);
  CHECK(dispersion(fm) == doctest::Approx(oracle::sample_std(fm.values.data)).epsilon(1e-13));
}

TEST_CASE("dispersion rejects fewer than two elements") {
  CHECK_THROWS_AS(dispersion(std::vector<double>{1.0}), drt::DegenerateFeature);
  CHECK_THROWS_AS(dispersion(std::vector<double>{}), drt::DegenerateFeature);
}

TEST_CASE("dispersion gradient matches central differences") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd(0.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(2 + trial * 7);
    for (auto& x : v) x = nd(rng);
    std::vector<double> g(v.size());
    dispersion_with_gradient(v, g);
    const double h = 1e-5;
    for (std::size_t i = 0; i < v.size(); ++i) {
      auto up = v, down = v;
      up[i] += h;
      down[i] -= h;
      const double fd = (oracle::sample_std(up) - oracle::sample_std(down)) / (2 * h);
      CHECK(std::abs(fd - g[i]) <= 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}
