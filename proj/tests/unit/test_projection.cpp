#include <doctest.h>

#include "drt/attack/projection.hpp"
#include "drt/errors.hpp"

using namespace drt;

TEST_CASE("projection clips to the budget ball and pixel range") {
  std::vector<double> adv{130, 266, 50}, orig{100, 250, 50};
  attack::project_inplace(adv, orig, 16);
  CHECK(adv[0] == 116);
  CHECK(adv[1] == 255);
  CHECK(adv[2] == 50);
}

TEST_CASE("projection of an in-ball point is the identity") {
  const ImageBatch orig(Tensor(Shape{1, 1, 1, 3}, {10, 20, 30}), {"a"});
  const ImageBatch adv(Tensor(Shape{1, 1, 1, 3}, {12, 5, 30}), {"a"});
  CHECK(attack::project(adv, orig, 16) == adv);
}

TEST_CASE("projection with a zero budget returns the original") {
  std::vector<double> adv{0, 255, 7.5}, orig{3, 200, 7};
  attack::project_inplace(adv, orig, 0);
  CHECK(adv == orig);
}

TEST_CASE("linf distance") {
  CHECK(attack::linf_distance(std::vector<double>{1, 5, 3}, std::vector<double>{1, 2, 4}) == 3);
}

TEST_CASE("quantization rounds half to even and stays inside the budget") {
  std::vector<double> orig{100, 100, 100, 100, 0, 255};
  std::vector<double> adv{100.5, 101.5, 116.4, 83.6, -0.2, 255};
  attack::quantize_into_ball(adv, orig, 16);
  CHECK(adv[0] == 100);
  CHECK(adv[1] == 102);
  CHECK(adv[2] == 116);
  CHECK(adv[3] == 84);
  CHECK(adv[4] == 0);
  CHECK(adv[5] == 255);
}

TEST_CASE("quantization with a fractional budget stays inside it") {
  std::vector<double> orig{100}, adv{101.4};
  attack::quantize_into_ball(adv, orig, 1.5);
  CHECK(adv[0] == 101);
  CHECK(attack::linf_distance(adv, orig) <= 1.5);
}
