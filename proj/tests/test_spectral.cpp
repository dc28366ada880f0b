#include <catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "polymer/spectral.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using polymer::Potential;

namespace {

const Potential unit = Potential::indicator(1.0, 1.0);
const double beta_cr_exact = std::numbers::pi * std::numbers::pi / 8.0;

Eigen::MatrixXd dense(const polymer::NystromKernel& K) {
  Eigen::MatrixXd m(K.n, K.n);
  for (std::size_t i = 0; i < K.n; ++i)
    for (std::size_t j = 0; j < K.n; ++j) m(i, j) = K(i, j);
  return m;
}

}  // namespace

TEST_CASE("reduced kernel matches the 3-D angular integral", "[spectral]") {
  const double mu = std::sqrt(2.0);  // k = 1
  for (auto [r, s] : {std::pair{0.5, 0.5}, {0.2, 0.9}, {0.9, 0.3}}) {
    const auto mc = oracle::reduced_kernel_3d(r, s, mu, 2'000'000, 11);
    const double g = polymer::reduced_green(r, s, mu);
    CHECK(std::abs(g - mc.mean) < 5.0 * mc.stderr_);
    CHECK_THAT(g, WithinRel(mc.mean, 1e-3));
  }
  // the diagonal example: 2 sinh(sqrt2/2) e^{-sqrt2/2} / sqrt2
  CHECK_THAT(polymer::reduced_green(0.5, 0.5, mu),
             WithinRel(2.0 * std::sinh(mu * 0.5) * std::exp(-mu * 0.5) / mu, 1e-14));
  // negative k: kernel grows but stays finite on the support
  const auto neg = oracle::reduced_kernel_3d(0.7, 0.4, -mu, 2'000'000, 12);
  CHECK_THAT(polymer::reduced_green(0.7, 0.4, -mu), WithinRel(neg.mean, 1e-3));
}

TEST_CASE("row integral of the reduced kernel", "[spectral]") {
  for (double mu : {0.0, 1e-9, 0.3, 2.0, -1.5}) {
    for (double r : {0.01, 0.4, 1.0}) {
      const double ref =
          oracle::romberg([&](double s) { return polymer::reduced_green(r, s, mu); }, 0.0, r) +
          oracle::romberg([&](double s) { return polymer::reduced_green(r, s, mu); }, r, 1.0);
      CHECK_THAT(polymer::reduced_green_row_integral(r, 1.0, mu), WithinRel(ref, 1e-11));
    }
  }
}

TEST_CASE("k = 0 kernel entries are 2 sqrt(v) min(r, s) sqrt(v) with weights", "[spectral]") {
  const auto p = Potential::tabulated({{0.0, 2.0}, {0.6, 1.0}, {1.0, 0.0}}, 1.0);
  const auto K = polymer::assemble_kernel(p, 0.0, 32);
  for (std::size_t i = 0; i < K.n; ++i) {
    for (std::size_t j = 0; j < K.n; ++j) {
      if (i == j) continue;
      const double ri = K.nodes[i], rj = K.nodes[j];
      const double expect = std::sqrt(p(ri) * K.weights[i]) * 2.0 * std::min(ri, rj) * std::sqrt(p(rj) * K.weights[j]);
      REQUIRE_THAT(K(i, j), WithinRel(expect, 1e-13));
    }
  }
}

TEST_CASE("symmetric kernel is exactly symmetric", "[spectral]") {
  for (double k : {-1.5, 0.0, 0.7, 5.0}) {
    const auto K = polymer::assemble_kernel(Potential::smooth_bump(1.3, 2.0), k, 64);
    for (std::size_t i = 0; i < K.n; ++i)
      for (std::size_t j = 0; j < i; ++j) REQUIRE(K(i, j) == K(j, i));
  }
}

TEST_CASE("symmetrized and plain discretizations share the top eigenvalue", "[spectral]") {
  for (double k : {-1.0, 0.0, 0.64731, 3.0}) {
    const auto Ks = polymer::assemble_kernel(unit, k, 120);
    const auto Ku = polymer::assemble_unsymmetrized_kernel(unit, k, 120);
    const double ps = polymer::power_iteration(Ks).value;
    const double pu = polymer::power_iteration(Ku).value;
    CHECK_THAT(ps, WithinRel(pu, 1e-8));
    // dense reference eigensolvers
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(Ks));
    Eigen::EigenSolver<Eigen::MatrixXd> eu(dense(Ku));
    double top_u = 0.0;
    for (Eigen::Index i = 0; i < eu.eigenvalues().size(); ++i) top_u = std::max(top_u, eu.eigenvalues()[i].real());
    CHECK_THAT(ps, WithinRel(es.eigenvalues().maxCoeff(), 1e-10));
    CHECK_THAT(pu, WithinRel(top_u, 1e-8));
  }
}

TEST_CASE("sigma0 of the unit square well", "[spectral]") {
  CHECK_THAT(polymer::sigma0(unit, 0.0, 400).sigma0, WithinRel(8.0 / (std::numbers::pi * std::numbers::pi), 1e-9));
  // q = 2 bound state
  const double k2 = 2.0 / (std::sqrt(2.0) * std::tan(2.0)) * -1.0;
  CHECK_THAT(oracle::square_well_beta(k2, 1.0), WithinRel(2.0 + k2 * k2, 1e-12));
  CHECK_THAT(polymer::sigma0(unit, k2, 400).sigma0, WithinRel(1.0 / (2.0 + k2 * k2), 1e-9));
  // the rounded k of the worked example
  CHECK_THAT(polymer::sigma0(unit, 0.64731, 400).sigma0, WithinAbs(0.41339, 1e-4));
  for (double k : {-1.0, -0.8, -0.3, 0.2, 1.0, 4.0, 10.0}) {
    CHECK_THAT(polymer::sigma0(unit, k, 400).sigma0, WithinRel(oracle::square_well_sigma0(k, 1.0), 1e-9));
  }
}

TEST_CASE("sigma0 is small for large k", "[spectral]") {
  for (const auto& p : {unit, Potential::smooth_bump(1.0, 1.0), Potential::indicator(2.0, 0.5)}) {
    const double b = p.support_radius();
    CHECK(polymer::sigma0(p, 50.0 / b, 200).sigma0 < polymer::sigma0(p, 0.0, 200).sigma0 / 100.0);
  }
}

TEST_CASE("Nystrom self-convergence", "[spectral]") {
  for (double k : {-1.0, 0.0, 0.5, 3.0, 10.0}) {
    const double a = polymer::sigma0(unit, k, 200).sigma0;
    const double b = polymer::sigma0(unit, k, 400).sigma0;
    CHECK(std::abs(a - b) < 1e-8);
  }
  const auto bump = Potential::smooth_bump(1.0, 1.0);
  polymer::SpectralOptions o200, o400;
  o200.n_nodes = 200;
  o400.n_nodes = 400;
  CHECK(std::abs(polymer::beta_critical(bump, o200).beta_cr - polymer::beta_critical(bump, o400).beta_cr) < 1e-6);
}

TEST_CASE("sigma0 is strictly decreasing with nonnegative eigenfunctions", "[spectral]") {
  for (const auto& p : {unit, Potential::smooth_bump(1.0, 1.0),
                        Potential::tabulated({{0.0, 0.5}, {0.3, 2.0}, {0.8, 0.0}}, 1.0)}) {
    const double b = p.support_radius();
    const auto curve = polymer::spectral_curve(p, polymer::linear_grid(-1.0 / b, 10.0 / b, 23), {}, 2);
    for (std::size_t i = 0; i < curve.k.size(); ++i) {
      REQUIRE(curve.sigma0[i] > 0.0);
      if (i > 0) REQUIRE(curve.sigma0[i] < curve.sigma0[i - 1]);
      const auto& phi = curve.eigenfunctions[i];
      const double peak = *std::max_element(phi.begin(), phi.end());
      for (double x : phi) REQUIRE(x >= -1e-12 * peak);
    }
  }
}

TEST_CASE("critical coupling", "[spectral]") {
  CHECK_THAT(polymer::beta_critical(unit).beta_cr, WithinRel(beta_cr_exact, 1e-9));
  CHECK_THAT(polymer::beta_critical(Potential::indicator(2.0, 1.0)).beta_cr, WithinRel(beta_cr_exact / 4.0, 1e-9));
  // amplitude scales the coupling inversely
  CHECK_THAT(polymer::beta_critical(Potential::indicator(1.0, 4.0)).beta_cr, WithinRel(beta_cr_exact / 4.0, 1e-9));
  const auto bump = Potential::smooth_bump(1.0, 1.0);
  const auto crit = polymer::beta_critical(bump);
  CHECK_THAT(crit.beta_cr * polymer::sigma0(bump, 0.0, 400).sigma0, WithinAbs(1.0, 1e-12));
}

TEST_CASE("lambda0 on both sides of the threshold", "[spectral]") {
  const auto crit = polymer::critical_data(unit);
  polymer::SpectralOptions wide;
  wide.window = 1.0;

  const auto at = polymer::lambda0(unit, crit.beta_cr, crit);
  CHECK(at.branch == polymer::Branch::critical);
  CHECK(at.lambda0 < 1e-18);

  const auto q2 = polymer::lambda0(unit, 2.41915, crit, wide);
  CHECK(q2.branch == polymer::Branch::eigenvalue);
  CHECK_THAT(q2.k_root, WithinAbs(0.64731, 1e-3));
  CHECK_THAT(q2.lambda0, WithinAbs(0.41901, 1e-3));
  CHECK_THAT(q2.k_root, WithinAbs(oracle::square_well_k(2.41915, 1.0), 1e-9));

  const double below = crit.beta_cr - 0.05;
  const auto res = polymer::lambda0(unit, below, crit);
  CHECK(res.branch == polymer::Branch::resonance);
  CHECK(res.k_root < 0.0);
  CHECK_THAT(res.lambda0, WithinRel(crit.kappa * 0.05 * 0.05, 0.05));
  CHECK_THAT(res.k_root, WithinAbs(oracle::square_well_k(below, 1.0), 1e-9));

  CHECK_THROWS_AS(polymer::lambda0(unit, 2.41915, crit), polymer::BracketError);
}

TEST_CASE("root consistency over the window", "[spectral]") {
  const auto crit = polymer::critical_data(unit);
  for (double rel : {-0.249, -0.1, -0.01, 0.003, 0.05, 0.2, 0.249}) {
    const double beta = crit.beta_cr * (1.0 + rel);
    const auto l = polymer::lambda0(unit, beta, crit);
    CHECK_THAT(beta * polymer::sigma0(unit, l.k_root, 400).sigma0, WithinAbs(1.0, 1e-8));
  }
}

TEST_CASE("curvature constant", "[spectral]") {
  const auto crit = polymer::critical_data(unit);
  CHECK_THAT(crit.kappa, WithinRel(0.5, 1e-6));
  CHECK_THAT(crit.kappa_fit, WithinRel(0.5, 1e-3));
  CHECK(crit.sigma0_prime_at_0 < 0.0);
  CHECK_THAT(crit.kappa, WithinRel(1.0 / std::pow(crit.beta_cr * crit.beta_cr * crit.sigma0_prime_at_0, 2), 1e-12));

  // lambda0 / d^2 -> kappa along a shrinking sequence
  double prev_err = 1e300;
  for (double rel : {0.04, 0.02, 0.01, 0.005}) {
    const double d = rel * crit.beta_cr;
    const double err = std::abs(polymer::lambda0(unit, crit.beta_cr + d, crit).lambda0 / (d * d) - crit.kappa) / crit.kappa;
    CHECK(err < prev_err);
    prev_err = err;
  }
  CHECK(prev_err < 0.02);

  // b = 2: the matching condition gives dk/dbeta = b/sqrt2 at threshold,
  // so kappa = b^2/2 = 2.
  const auto p2 = Potential::indicator(2.0, 1.0);
  const auto c2 = polymer::critical_data(p2);
  const double h = 1e-5;
  const double slope = (oracle::square_well_k(c2.beta_cr + h, 2.0) - oracle::square_well_k(c2.beta_cr - h, 2.0)) / (2 * h);
  CHECK_THAT(slope * slope, WithinRel(2.0, 1e-5));
  CHECK_THAT(c2.kappa, WithinRel(slope * slope, 1e-5));

  for (const auto& p : {Potential::smooth_bump(1.0, 1.0), Potential::tabulated({{0.0, 1.0}, {1.0, 0.0}}, 1.0)}) {
    CHECK(polymer::critical_data(p).kappa > 0.0);
  }
}

TEST_CASE("varsigma at threshold and across the removable point", "[spectral]") {
  const auto crit = polymer::critical_data(unit);
  const double c = polymer::varsigma(unit, 0.0, crit.beta_cr, crit);
  CHECK(c > 0.0);
  CHECK_THAT(c, WithinRel(-crit.sigma0_prime_at_0, 1e-9));
  CHECK_THAT(c, WithinRel(1.0 / (crit.beta_cr * crit.beta_cr * std::sqrt(crit.kappa)), 1e-6));
  CHECK_THAT(c, WithinAbs(0.9292, 1e-4));

  const double beta = crit.beta_cr * 1.1;
  const double kr = polymer::lambda0(unit, beta, crit).k_root;
  const double left = polymer::varsigma(unit, kr - 1e-4, beta, crit);
  const double right = polymer::varsigma(unit, kr + 1e-4, beta, crit);
  CHECK(std::abs(left - right) < 1e-3 * std::abs(right));
}

TEST_CASE("kernel argument checks", "[spectral]") {
  CHECK_THROWS_AS(polymer::assemble_kernel(unit, 0.0, 8), polymer::ValidationError);
  CHECK_THROWS_AS(polymer::assemble_kernel(unit, std::nan(""), 32), polymer::ValidationError);
  CHECK_THROWS_AS(polymer::lambda0(unit, -1.0, polymer::beta_critical(unit)), polymer::ValidationError);
}
