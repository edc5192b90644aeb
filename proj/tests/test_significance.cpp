#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <limits>
#include <random>

#include "sigtask/significance.hpp"

using namespace sigtask;

TEST_CASE("significance accepts [0,1] and rejects everything else") {
  CHECK(Significance(0.0).value() == 0.0);
  CHECK(Significance(1.0).value() == 1.0);
  CHECK(Significance(0.35).value() == doctest::Approx(0.35));
  CHECK_THROWS_AS(Significance(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(Significance(1.0000001), std::invalid_argument);
  CHECK_THROWS_AS(Significance(std::numeric_limits<double>::quiet_NaN()),
                  std::invalid_argument);
}

TEST_CASE("endpoint values are unconditional") {
  CHECK(Significance(1.0).forces_accurate());
  CHECK(Significance(0.0).forces_approximate());
  CHECK_FALSE(Significance(1.0).discretionary());
  CHECK_FALSE(Significance(0.0).discretionary());
  CHECK(Significance(0.5).discretionary());
  // Close to the endpoints is still discretionary.
  CHECK(Significance(0.999).discretionary());
  CHECK(Significance(0.001).discretionary());
}

TEST_CASE("discrete levels: 101 values, round-to-nearest") {
  CHECK(DiscreteLevel::kCount == 101);
  CHECK(DiscreteLevel(Significance(0.0)).index() == 0);
  CHECK(DiscreteLevel(Significance(1.0)).index() == 100);
  CHECK(DiscreteLevel(Significance(0.35)).index() == 35);
  CHECK(DiscreteLevel(Significance(0.004)).index() == 0);
  CHECK(DiscreteLevel(Significance(0.006)).index() == 1);
  CHECK(DiscreteLevel(Significance(0.999)).index() == 100);
  CHECK_THROWS_AS(DiscreteLevel(-1), std::invalid_argument);
  CHECK_THROWS_AS(DiscreteLevel(101), std::invalid_argument);
}

TEST_CASE("level mapping is monotone in significance") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double a = u(rng), b = u(rng);
    const Significance lo(std::min(a, b)), hi(std::max(a, b));
    CHECK(DiscreteLevel(lo).index() <= DiscreteLevel(hi).index());
  }
}
