#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "polymer/potential.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using polymer::Potential;

TEST_CASE("indicator values inside and outside the ball", "[potential]") {
  const auto p = Potential::indicator(1.0, 1.0);
  CHECK(p(0.5) == 1.0);
  CHECK(p(2.0) == 0.0);
  CHECK(p(1.0) == 1.0);
  CHECK(p(std::nextafter(1.0, 2.0)) == 0.0);
}

TEST_CASE("smooth bump vanishes at the edge and peaks at the origin", "[potential]") {
  const auto p = Potential::smooth_bump(1.0, 1.0);
  CHECK(p(1.0) == 0.0);
  CHECK(p(0.0) == 1.0);
  CHECK(p(0.999) < 1e-100);
  CHECK(p(0.5) == std::exp(1.0 - 1.0 / 0.75));
}

TEST_CASE("ball volumes", "[potential]") {
  const auto n1 = polymer::potential_norms(Potential::indicator(1.0, 1.0));
  CHECK_THAT(n1.integral, WithinRel(4.0 * std::numbers::pi / 3.0, 1e-12));
  CHECK(n1.max_value == 1.0);
  const auto n2 = polymer::potential_norms(Potential::indicator(2.0, 1.0));
  CHECK_THAT(n2.integral, WithinRel(32.0 * std::numbers::pi / 3.0, 1e-12));
  CHECK(n2.max_value == 1.0);
}

TEST_CASE("bump norm against a Romberg reference", "[potential]") {
  // 4 pi int_0^1 r^2 exp(1 - 1/(1 - r^2)) dr
  const double ref = oracle::romberg(
      [](double r) { return r >= 1.0 ? 0.0 : 4.0 * oracle::pi * r * r * std::exp(1.0 - 1.0 / (1.0 - r * r)); }, 0.0,
      1.0, 22);
  const auto n = polymer::potential_norms(Potential::smooth_bump(1.0, 1.0));
  CHECK_THAT(n.integral, WithinRel(ref, 1e-10));
  CHECK(n.max_value == 1.0);
  // refinement leaves the value put
  const auto fine = polymer::potential_norms(Potential::smooth_bump(1.0, 1.0), 256);
  CHECK_THAT(fine.integral, WithinRel(n.integral, 1e-12));
}

TEST_CASE("potentials are nonnegative and vanish past b", "[potential]") {
  const std::vector<Potential> ps = {
      Potential::indicator(1.5, 2.0), Potential::smooth_bump(0.7, 3.0),
      Potential::tabulated({{0.0, 1.0}, {0.4, 2.0}, {1.0, 0.5}, {1.2, 0.0}}, 1.0)};
  for (const auto& p : ps) {
    const double b = p.support_radius();
    for (int i = 0; i <= 4000; ++i) {
      const double r = 3.0 * b * i / 4000.0;
      REQUIRE(p(r) >= 0.0);
      if (r > b) REQUIRE(p(r) == 0.0);
    }
  }
}

TEST_CASE("tabulated profiles interpolate linearly", "[potential]") {
  const auto p = Potential::tabulated({{0.0, 1.0}, {0.5, 3.0}, {1.0, 0.0}}, 2.0);
  CHECK(p.support_radius() == 1.0);
  CHECK_THAT(p(0.25), WithinAbs(4.0, 1e-14));
  CHECK_THAT(p(0.75), WithinAbs(3.0, 1e-14));
  CHECK(p.max_value() == 6.0);
  const double i1 = oracle::romberg([](double r) { return r * r * 2.0 * (1.0 + 4.0 * r); }, 0.0, 0.5);
  const double i2 = oracle::romberg([](double r) { return r * r * 12.0 * (1.0 - r); }, 0.5, 1.0);
  CHECK_THAT(polymer::potential_norms(p).integral, WithinRel(4.0 * oracle::pi * (i1 + i2), 1e-12));
}

TEST_CASE("invalid potentials are rejected", "[potential]") {
  using polymer::ValidationError;
  CHECK_THROWS_AS(Potential::indicator(0.0, 1.0), ValidationError);
  CHECK_THROWS_AS(Potential::indicator(1.0, -1.0), ValidationError);
  CHECK_THROWS_AS(Potential::indicator(1.0, 0.0), ValidationError);
  CHECK_THROWS_AS(Potential::tabulated({{0.0, 1.0}, {1.0, 0.5}}, 1.0), ValidationError);   // does not end at 0
  CHECK_THROWS_AS(Potential::tabulated({{0.1, 1.0}, {1.0, 0.0}}, 1.0), ValidationError);   // does not start at 0
  CHECK_THROWS_AS(Potential::tabulated({{0.0, -1.0}, {1.0, 0.0}}, 1.0), ValidationError);  // negative
  CHECK_THROWS_AS(Potential::tabulated({{0.0, 1.0}, {0.5, 1.0}, {0.5, 0.0}}, 1.0), ValidationError);
  CHECK_THROWS_AS(polymer::parse_potential_kind("gaussian"), ValidationError);
}
