#pragma once

// Feynman-Kac estimate of Z = E exp(beta int_0^t v(w(s)) ds) and of the
// weighted second moment E |w(t)|^2 exp(...) over 3-D Brownian paths from
// the origin. Paths are grouped into fixed-size blocks; block b draws from
// its own engine seeded by (seed, b), and block sums are reduced pairwise
// in block order, so results do not depend on the number of workers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <boost/random/normal_distribution.hpp>

#include <random>
#include <vector>

#include "polymer/error.hpp"
#include "polymer/parallel.hpp"
#include "polymer/potential.hpp"
#include "polymer/propagator.hpp"

namespace polymer {

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
};

struct McResult {
  McEstimate Z;
  McEstimate m2;
  double r = 0.0;
  double r_stderr = 0.0;  // delta method, including the Z-m2 covariance
  double step = 0.0;
  // stderr/mean of Z or m2 above 5 %.
  bool under_resolved = false;
};

namespace detail {

struct McSums {
  double w = 0.0, w2 = 0.0;    // sum W, sum W^2
  double m = 0.0, m2 = 0.0;    // sum |x|^2 W, its square
  double wm = 0.0;             // sum W |x|^2 W

  McSums& operator+=(const McSums& o) {
    w += o.w;
    w2 += o.w2;
    m += o.m;
    m2 += o.m2;
    wm += o.wm;
    return *this;
  }
};

inline McSums pairwise_sum(const std::vector<McSums>& blocks, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return blocks[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  McSums s = pairwise_sum(blocks, lo, mid);
  s += pairwise_sum(blocks, mid, hi);
  return s;
}

inline constexpr std::size_t kPathsPerBlock = 1000;

}  // namespace detail

inline double default_mc_step(double t, const SolverConfig& cfg) {
  return cfg.mc_step > 0.0 ? cfg.mc_step : std::min(0.01, t / 100.0);
}

inline McResult feynman_kac_mc(const Potential& p, double beta, double t, const SolverConfig& cfg,
                               std::size_t jobs = 1) {
  cfg.validate();
  if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("t must be positive");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ValidationError("beta must be >= 0");
  const double h_target = default_mc_step(t, cfg);
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::round(t / h_target)));
  const double h = t / static_cast<double>(steps);
  const double sd = std::sqrt(h);
  const double b2 = p.support_radius() * p.support_radius();
  const double v_origin = p(0.0);

  const std::size_t n_paths = cfg.mc_paths;
  const std::size_t n_blocks = (n_paths + detail::kPathsPerBlock - 1) / detail::kPathsPerBlock;
  std::vector<detail::McSums> blocks(n_blocks);

  parallel_for(n_blocks, jobs, [&](std::size_t blk) {
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(blk), static_cast<std::uint32_t>(blk >> 32)};
    std::mt19937_64 engine(seq);
    boost::random::normal_distribution<double> normal(0.0, sd);
    const std::size_t first = blk * detail::kPathsPerBlock;
    const std::size_t last = std::min(n_paths, first + detail::kPathsPerBlock);
    detail::McSums s;
    for (std::size_t path = first; path < last; ++path) {
      double x = 0.0, y = 0.0, z = 0.0;
      double v_prev = v_origin;
      double occupation = 0.0;
      for (std::size_t i = 0; i < steps; ++i) {
        x += normal(engine);
        y += normal(engine);
        z += normal(engine);
        const double rr = x * x + y * y + z * z;
        const double v_now = rr > b2 ? 0.0 : p(std::sqrt(rr));
        occupation += 0.5 * h * (v_prev + v_now);
        v_prev = v_now;
      }
      const double weight = std::exp(beta * occupation);
      const double mw = (x * x + y * y + z * z) * weight;
      s.w += weight;
      s.w2 += weight * weight;
      s.m += mw;
      s.m2 += mw * mw;
      s.wm += weight * mw;
    }
    blocks[blk] = s;
  });

  const detail::McSums tot = detail::pairwise_sum(blocks, 0, n_blocks);
  const auto n = static_cast<double>(n_paths);
  McResult res;
  res.step = h;
  const double zbar = tot.w / n;
  const double mbar = tot.m / n;
  const double var_w = std::max(0.0, (tot.w2 / n - zbar * zbar) * n / (n - 1.0));
  const double var_m = std::max(0.0, (tot.m2 / n - mbar * mbar) * n / (n - 1.0));
  const double cov = (tot.wm / n - zbar * mbar) * n / (n - 1.0);
  res.Z = {zbar, std::sqrt(var_w / n), n_paths};
  res.m2 = {mbar, std::sqrt(var_m / n), n_paths};
  const double ratio = mbar / zbar;
  res.r = std::sqrt(ratio);
  // Var(m/Z) ~ (Var m - 2 R Cov + R^2 Var Z) / (n Z^2); r = sqrt(R).
  const double var_ratio = std::max(0.0, (var_m - 2.0 * ratio * cov + ratio * ratio * var_w) / (n * zbar * zbar));
  res.r_stderr = std::sqrt(var_ratio) / (2.0 * res.r);
  res.under_resolved = res.Z.std_error > 0.05 * res.Z.mean || res.m2.std_error > 0.05 * res.m2.mean;
  return res;
}

}  // namespace polymer
