#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "polymer/propagator.hpp"
#include "polymer/scaling.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using polymer::Potential;

namespace {

const Potential unit = Potential::indicator(1.0, 1.0);
const polymer::CriticalData& unit_crit() {
  static const polymer::CriticalData c = polymer::critical_data(unit);
  return c;
}

}  // namespace

TEST_CASE("free case has zero correction and r = sqrt(3t)", "[propagator]") {
  const polymer::SolverConfig cfg;
  for (double t : {1.0, 10.0, 100.0}) {
    const auto prof = polymer::solve_forced_heat(unit, 0.0, t, cfg);
    CHECK(prof.max_abs_u() == 0.0);
    const auto rec = polymer::moments(unit, 0.0, t, cfg, unit_crit());
    CHECK(rec.Z == 1.0);
    CHECK_THAT(rec.r, WithinRel(std::sqrt(3.0 * t), 1e-12));
  }
  CHECK_THAT(polymer::moments(unit, 0.0, 100.0, cfg, unit_crit()).r, WithinAbs(17.3205, 1e-4));
}

TEST_CASE("first-order Duhamel expansion in beta", "[propagator]") {
  for (double t : {0.5, 2.0, 8.0}) {
    polymer::SolverConfig cfg;
    cfg.dt = std::min(0.1, t / 40.0);  // a handful of steps is not enough at small t
    const double beta = 1e-3;
    const auto plus = polymer::moments(unit, beta, t, cfg, unit_crit());
    const auto minus_free = polymer::moments(unit, 0.0, t, cfg, unit_crit());
    const double dZ = (plus.Z - 1.0) / beta;
    const double dm2 = (plus.m2 - minus_free.m2) / beta;
    const double ref_Z = oracle::duhamel_dZ(t, 1.0);
    const double ref_m2 = oracle::duhamel_dm2(t, 1.0);
    // O(beta t) second-order remainder plus discretization
    CHECK_THAT(dZ, WithinRel(ref_Z, 2e-3 + 2.0 * beta * t));
    CHECK_THAT(dm2, WithinRel(ref_m2, 2e-3 + 2.0 * beta * t));
  }
}

TEST_CASE("moment record identities", "[propagator]") {
  const polymer::SolverConfig cfg;
  for (double beta : {0.5, 1.2, 1.4}) {
    const auto rec = polymer::moments(unit, beta, 20.0, cfg, unit_crit());
    CHECK(rec.Z == rec.m0);
    CHECK(rec.Z >= 1.0);
    CHECK(rec.m2 > 0.0);
    CHECK(rec.r == std::sqrt(rec.m2 / rec.m0));
    CHECK(rec.regime == polymer::classify_regime(beta, 20.0, unit_crit().beta_cr).regime);
  }
}

TEST_CASE("Z is monotone in beta", "[propagator]") {
  const polymer::SolverConfig cfg;
  for (double t : {5.0, 50.0}) {
    double prev = 0.0;
    for (double beta : {0.0, 0.3, 0.9, 1.2, 1.2337, 1.3, 1.5}) {
      const double Z = polymer::moments(unit, beta, t, cfg, unit_crit()).Z;
      CHECK(Z >= 1.0);
      CHECK(Z >= prev);
      prev = Z;
    }
  }
}

TEST_CASE("correction stays nonnegative", "[propagator]") {
  const polymer::SolverConfig cfg;
  for (const auto& p : {unit, Potential::smooth_bump(1.0, 2.0)}) {
    const auto prof = polymer::solve_forced_heat(p, 1.3, 30.0, cfg);
    const double peak = prof.max_abs_u();
    for (double x : prof.u) REQUIRE(x >= -1e-12 * peak);
  }
}

TEST_CASE("series snapshots match single solves", "[propagator]") {
  const polymer::SolverConfig cfg;
  const double beta = 1.3;
  const std::vector<double> times{5.0, 20.0, 80.0};
  const auto series = polymer::moments_series(unit, beta, times, cfg, unit_crit());
  REQUIRE(series.size() == 3);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto single = polymer::moments(unit, beta, times[i], cfg, unit_crit());
    // different outer radius and step alignment: agree to discretization level
    CHECK_THAT(series[i].Z, WithinRel(single.Z, 1e-4));
    CHECK_THAT(series[i].r, WithinRel(single.r, 1e-4));
  }
}

TEST_CASE("grid refinement changes r by less than 0.2 percent", "[propagator]") {
  for (double rel : {-0.05, 0.0, 0.05}) {
    const double beta = unit_crit().beta_cr * (1.0 + rel);
    const auto g = polymer::convergence_guard(unit, beta, 160.0, polymer::SolverConfig{}, unit_crit());
    CHECK(g.pass());
    CHECK(g.relative_change() < 0.002);
  }
}

TEST_CASE("ground-state growth rate", "[propagator]") {
  // q = 2 bound state of the unit well
  polymer::SpectralOptions wide;
  wide.window = 1.0;
  const double beta = 2.41915;
  const double lam = polymer::lambda0(unit, beta, unit_crit(), wide).lambda0;
  const double t = 6.0 / lam;
  const polymer::SolverConfig cfg;
  const auto series = polymer::moments_series(unit, beta, {t - 2.0, t, t + 2.0}, cfg, unit_crit(), wide);
  const double slope = (std::log(series[2].Z - 1.0) - std::log(series[0].Z - 1.0)) / 4.0;
  CHECK_THAT(slope, WithinRel(lam, 0.03));
  CHECK_THAT(slope, WithinRel(0.41901, 0.03));
}

TEST_CASE("globular radius follows the ground state", "[propagator]") {
  const polymer::SolverConfig cfg;
  for (double rel : {0.02, 0.05}) {
    const double beta = unit_crit().beta_cr * (1.0 + rel);
    const double gamma = polymer::lambda0(unit, beta, unit_crit()).k_root;
    const double t = 6.0 / (gamma * gamma);
    const auto rec = polymer::moments(unit, beta, t, cfg, unit_crit());
    CHECK(rec.regime == polymer::Regime::globular);
    CHECK_THAT(rec.r * gamma, WithinRel(std::sqrt(3.0), 0.15));
  }
}

TEST_CASE("fixed beta below threshold spreads like sqrt(3t)", "[propagator]") {
  const polymer::SolverConfig cfg;
  const double beta = 0.75 * unit_crit().beta_cr;
  const auto rec = polymer::moments(unit, beta, 2560.0, cfg, unit_crit());
  CHECK(rec.chi <= -2.0);
  CHECK_THAT(rec.r / std::sqrt(rec.t), WithinRel(std::sqrt(3.0), 0.05));
}

TEST_CASE("end-point density", "[propagator]") {
  const polymer::SolverConfig cfg;
  SECTION("free case is the heat kernel") {
    const auto d = polymer::endpoint_density(unit, 0.0, 10.0, cfg);
    for (std::size_t i = 0; i < d.r.size(); i += 37) {
      REQUIRE(d.q[i] == polymer::free_kernel(10.0, d.r[i]));
      REQUIRE(d.q[i] == std::exp(-d.r[i] * d.r[i] / 20.0) / std::pow(20.0 * std::numbers::pi, 1.5));
    }
  }
  SECTION("normalized on the desk grid") {
    for (double rel : {-0.05, 0.0, 0.05}) {
      for (double t : {10.0, 40.0, 160.0}) {
        const auto d = polymer::endpoint_density(unit, unit_crit().beta_cr * (1.0 + rel), t, cfg);
        CHECK_THAT(d.normalization, WithinAbs(1.0, 1e-6));
        const double peak = *std::max_element(d.q.begin(), d.q.end());
        for (double q : d.q) REQUIRE(q >= -1e-12 * peak);
      }
    }
  }
  SECTION("globular mode sits at O(1/gamma) and moves in with beta") {
    double prev_mode = 1e300;
    for (double rel : {0.1, 0.2}) {
      const double beta = unit_crit().beta_cr * (1.0 + rel);
      const double gamma = polymer::lambda0(unit, beta, unit_crit()).k_root;
      const double t = 9.0 / (gamma * gamma);  // chi well above 3
      REQUIRE(polymer::classify_regime(beta, t, unit_crit().beta_cr).chi >= 3.0);
      const auto d = polymer::endpoint_density(unit, beta, t, cfg);
      std::size_t arg = 0;
      for (std::size_t i = 0; i < d.r.size(); ++i) {
        if (d.r[i] * d.r[i] * d.q[i] > d.r[arg] * d.r[arg] * d.q[arg]) arg = i;
      }
      const double mode = d.r[arg];
      // r e^{-sqrt2 gamma r} peaks at 1/(sqrt2 gamma)
      CHECK(mode > 0.5 / (std::sqrt(2.0) * gamma));
      CHECK(mode < 2.0 / (std::sqrt(2.0) * gamma));
      CHECK(mode < prev_mode);
      prev_mode = mode;
    }
  }
}

TEST_CASE("solver input checks", "[propagator]") {
  polymer::SolverConfig bad;
  bad.dr = 0.0;
  CHECK_THROWS_AS(polymer::solve_forced_heat(unit, 1.0, 1.0, bad), polymer::ValidationError);
  CHECK_THROWS_AS(polymer::solve_forced_heat(unit, 1.0, -1.0, polymer::SolverConfig{}), polymer::ValidationError);
  CHECK_THROWS_AS(polymer::solve_forced_heat(unit, -1.0, 1.0, polymer::SolverConfig{}), polymer::ValidationError);
  // too small a domain is reported, not silently truncated
  polymer::SolverConfig tight;
  tight.domain_factor = 4.0;
  CHECK_THROWS_AS(polymer::moments_series(unit, 1.3, {400.0}, tight, unit_crit()), polymer::DomainError);
}
