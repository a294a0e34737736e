#include <doctest.h>

#include "helpers.hpp"
#include "topo/oracle.hpp"

using namespace topo;
using topo::testing::grid_from;

namespace {

BinaryMask mask_from(const std::vector<std::vector<int>>& rows) {
  BinaryMask m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (int i = 0; i < m.height; ++i)
    for (int j = 0; j < m.width; ++j) m.at(i, j) = rows[i][j] ? 1 : 0;
  return m;
}

BinaryMask ring_mask3x3() { return mask_from({{1, 1, 1}, {1, 0, 1}, {1, 1, 1}}); }

}  // namespace

TEST_SUITE_BEGIN("oracle");

TEST_CASE("betti0: empty, diagonal touch, separated") {
  CHECK(betti0_bruteforce(BinaryMask(3, 3)) == 0);
  CHECK(betti0_bruteforce(mask_from({{1, 0}, {0, 1}})) == 1);  // corners count as adjacent
  CHECK(betti0_bruteforce(mask_from({{1, 0, 0}, {0, 0, 0}, {0, 0, 1}})) == 2);
}

TEST_CASE("euler characteristic of canonical shapes") {
  CHECK(euler_characteristic(mask_from({{1}})) == 1);       // 4 - 4 + 1
  CHECK(euler_characteristic(ring_mask3x3()) == 0);         // one component, one hole
  CHECK(euler_characteristic(mask_from({{1, 1}, {1, 1}})) == 1);  // 9 - 12 + 4
}

TEST_CASE("betti1 via beta0 - chi") {
  CHECK(betti1_bruteforce(ring_mask3x3()) == 1);
  CHECK(betti1_bruteforce(mask_from({{1, 1}, {1, 1}})) == 0);
  // two disjoint rings
  BinaryMask two(3, 7);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      two.at(i, j) = ring_mask3x3().at(i, j);
      two.at(i, j + 4) = ring_mask3x3().at(i, j);
    }
  CHECK(betti0_bruteforce(two) == 2);
  CHECK(betti1_bruteforce(two) == 2);
}

TEST_CASE("euler characteristic is additive over disjoint unions") {
  const BinaryMask a = testing::random_mask(5, 5, 0.5, 7);
  const BinaryMask b = testing::random_mask(5, 5, 0.5, 8);
  BinaryMask both(5, 12);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      both.at(i, j) = a.at(i, j);
      both.at(i, j + 7) = b.at(i, j);
    }
  CHECK(euler_characteristic(both) == euler_characteristic(a) + euler_characteristic(b));
}

TEST_CASE("betti curve of the all-ones grid") {
  const auto curve = betti_curve(ProbabilityGrid(3, 3, 1.0));
  REQUIRE(curve.size() == 2);
  CHECK(curve[0] == BettiPoint{0.0, 1, 0});
  CHECK(curve[1] == BettiPoint{1.0, 1, 0});
}

TEST_CASE("betti curve of the ring example") {
  const auto curve = betti_curve(testing::ring3x3());
  // distinct thresholds: 1-0.9, 1-0.1, 1
  REQUIRE(curve.size() == 3);
  CHECK(curve[0].p == doctest::Approx(0.1));
  CHECK(curve[0].betti0 == 1);
  CHECK(curve[0].betti1 == 1);
  CHECK(curve[1].p == doctest::Approx(0.9));
  CHECK(curve[1].betti0 == 1);
  CHECK(curve[1].betti1 == 0);
  CHECK(curve[2] == BettiPoint{1.0, 1, 0});
}

TEST_CASE("betti curve of a uniform 0.5 grid") {
  const auto curve = betti_curve(ProbabilityGrid(4, 4, 0.5));
  REQUIRE(curve.size() == 2);
  CHECK(curve[0] == BettiPoint{0.5, 1, 0});
  CHECK(curve[1] == BettiPoint{1.0, 1, 0});
}

TEST_SUITE_END();
