#pragma once

// Moments of the fundamental solution p_beta(t, 0, x) of
//   du/dt = (1/2) Laplacian u + beta v u.
//
// p_beta = p_0 + u with the free heat kernel p_0 handled analytically and
// the correction u solving the forced problem
//   du/dt = (1/2) Laplacian u + beta v u + beta v p_0,   u(0, .) = 0.
// For radial data w = r u satisfies
//   dw/dt = (1/2) w_rr + beta v w + beta v r p_0,   w(t, 0) = w(t, R) = 0,
// which is integrated by Crank-Nicolson on a mapped grid r = L sinh(xi/L)
// (uniform in xi: spacing ~dr near the support, geometric far out).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "polymer/error.hpp"
#include "polymer/potential.hpp"
#include "polymer/regime.hpp"
#include "polymer/spectral.hpp"

namespace polymer {

struct SolverConfig {
  double dr = 0.01;             // radial spacing near the origin
  double dt = 0.1;              // upper bound on the time step
  double domain_factor = 8.0;   // R = b + domain_factor * sqrt(t)
  double stretch = 5.0;         // grid mapping length L, in units of b
  std::size_t mc_paths = 100000;
  double mc_step = 0.0;         // 0 selects min(0.01, t/100)
  std::uint64_t seed = 20240917;

  void validate() const {
    if (!(dr > 0.0) || !std::isfinite(dr)) throw ValidationError("solver.dr must be positive");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("solver.dt must be positive");
    if (!(domain_factor >= 4.0)) throw ValidationError("solver.domain_factor must be >= 4");
    if (!(stretch > 0.0)) throw ValidationError("solver.stretch must be positive");
    if (mc_paths < 1000) throw ValidationError("solver.mc_paths must be >= 1000");
    if (!(mc_step >= 0.0)) throw ValidationError("solver.mc_step must be >= 0");
  }
};

/// Free heat kernel e^{-r^2/2t} / (2 pi t)^{3/2}.
inline double free_kernel(double t, double r) {
  return std::exp(-r * r / (2.0 * t)) / std::pow(2.0 * std::numbers::pi * t, 1.5);
}

/// Radial nodes r_0 = 0 < ... < r_N = R with quadrature weights of the
/// trapezoidal rule in the mapped coordinate.
struct RadialGrid {
  std::vector<double> r;
  std::vector<double> weights;
  double dxi = 0.0;
  double stretch = 0.0;

  std::size_t size() const noexcept { return r.size(); }
  double radius() const noexcept { return r.back(); }
};

inline RadialGrid make_radial_grid(double R, double dr, double stretch_length) {
  RadialGrid g;
  g.stretch = stretch_length;
  const double xi_max = stretch_length * std::asinh(R / stretch_length);
  const auto n = std::max<std::size_t>(8, static_cast<std::size_t>(std::ceil(xi_max / dr)));
  g.dxi = xi_max / static_cast<double>(n);
  g.r.resize(n + 1);
  g.weights.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double xi = g.dxi * static_cast<double>(i);
    g.r[i] = stretch_length * std::sinh(xi / stretch_length);
    g.weights[i] = g.dxi * std::cosh(xi / stretch_length);
  }
  g.r[n] = R;
  g.weights[0] *= 0.5;
  g.weights[n] *= 0.5;
  return g;
}

/// Snapshot of the correction u(t, r) on the grid.
struct RadialProfile {
  double beta = 0.0;
  double t = 0.0;
  RadialGrid grid;
  std::vector<double> w;  // r u, zero at both ends
  std::vector<double> u;  // u(0) by one-sided extrapolation

  /// 4 pi int r^{2+nu} u dr for nu in {0, 2}.
  double moment(int nu) const {
    double s = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double r = grid.r[i];
      s += grid.weights[i] * (nu == 0 ? r : r * r * r) * w[i];
    }
    return 4.0 * std::numbers::pi * s;
  }

  double max_abs_u() const {
    double m = 0.0;
    for (double x : u) m = std::max(m, std::abs(x));
    return m;
  }
};

/// Throws DomainError if the profile has not decayed at the outer boundary.
inline void check_domain(const RadialProfile& prof) {
  const double peak = prof.max_abs_u();
  const double edge = std::abs(prof.u[prof.u.size() - 2]);
  if (edge > 1e-12 * peak) {
    throw DomainError("radial domain too small at t = " + std::to_string(prof.t) + ": |u| near R = " +
                      std::to_string(prof.grid.radius()) + " is " + std::to_string(edge / peak) +
                      " of max u; increase solver.domain_factor");
  }
}

/// Crank-Nicolson integrator for w = r u. The grid is sized for t_max and
/// the solver can be advanced through a sequence of increasing times.
class ForcedHeatSolver {
 public:
  ForcedHeatSolver(const Potential& p, double beta, double t_max, const SolverConfig& cfg)
      : beta_(beta) {
    cfg.validate();
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw ValidationError("beta must be >= 0");
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw ValidationError("t must be positive");
    const double b = p.support_radius();
    grid_ = make_radial_grid(b + cfg.domain_factor * std::sqrt(t_max), cfg.dr, cfg.stretch * b);
    const std::size_t n = grid_.size();
    const std::size_t m = n - 2;  // interior unknowns, grid indices 1..n-2
    lower_.resize(m);
    centre_.resize(m);
    upper_.resize(m);
    bv_.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t i = k + 1;
      const double hm = grid_.r[i] - grid_.r[i - 1];
      const double hp = grid_.r[i + 1] - grid_.r[i];
      // (1/2) w_rr with the three-point nonuniform stencil.
      lower_[k] = 1.0 / (hm * (hm + hp));
      upper_[k] = 1.0 / (hp * (hm + hp));
      const double lo = 0.5 * (grid_.r[i - 1] + grid_.r[i]);
      const double hi = 0.5 * (grid_.r[i] + grid_.r[i + 1]);
      bv_[k] = beta * p.cell_average(lo, hi);
      centre_[k] = -1.0 / (hm * hp) + bv_[k];
      if (bv_[k] > 0.0) forced_.push_back(k);
    }
    const double peak = beta * p.max_value();
    dt_cap_ = peak > 0.0 ? std::min(cfg.dt, 0.1 / peak) : cfg.dt;
    w_.assign(m, 0.0);
    erfc_prev_.assign(forced_.size(), 0.0);
  }

  double time() const noexcept { return time_; }
  const RadialGrid& grid() const noexcept { return grid_; }

  void advance_to(double t) {
    if (t < time_) throw ValidationError("ForcedHeatSolver: cannot step backwards in time");
    if (t == time_) return;
    const auto steps = static_cast<std::size_t>(std::ceil((t - time_) / dt_cap_ * (1.0 - 1e-12)));
    const double dt = (t - time_) / static_cast<double>(std::max<std::size_t>(steps, 1));
    factor(dt);
    const std::size_t m = w_.size();
    std::vector<double> rhs(m);
    for (std::size_t s = 0; s < std::max<std::size_t>(steps, 1); ++s) {
      const double t_next = (s + 1 == steps) ? t : time_ + dt;
      for (std::size_t k = 0; k < m; ++k) {
        double lw = centre_[k] * w_[k];
        if (k > 0) lw += lower_[k] * w_[k - 1];
        if (k + 1 < m) lw += upper_[k] * w_[k + 1];
        rhs[k] = w_[k] + 0.5 * dt * lw;
      }
      // Exact time integral of beta v r p_0 over the step:
      // int r p_0 dtau = erfc(r / sqrt(2 tau)) / (2 pi).
      for (std::size_t j = 0; j < forced_.size(); ++j) {
        const std::size_t k = forced_[j];
        const double e = std::erfc(grid_.r[k + 1] / std::sqrt(2.0 * t_next));
        rhs[k] += bv_[k] * (e - erfc_prev_[j]) / (2.0 * std::numbers::pi);
        erfc_prev_[j] = e;
      }
      solve(rhs);
      time_ = t_next;
    }
  }

  RadialProfile profile() const {
    RadialProfile prof;
    prof.beta = beta_;
    prof.t = time_;
    prof.grid = grid_;
    const std::size_t n = grid_.size();
    prof.w.assign(n, 0.0);
    std::copy(w_.begin(), w_.end(), prof.w.begin() + 1);
    prof.u.assign(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) prof.u[i] = prof.w[i] / grid_.r[i];
    // w = a r + c r^2 through the first two interior nodes.
    const double r1 = grid_.r[1], r2 = grid_.r[2];
    prof.u[0] = (prof.w[1] * r2 * r2 - prof.w[2] * r1 * r1) / (r1 * r2 * (r2 - r1));
    return prof;
  }

 private:
  void factor(double dt) {
    if (dt == factored_dt_) return;
    const std::size_t m = w_.size();
    cprime_.resize(m);
    inv_denom_.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      const double a = -0.5 * dt * lower_[k];
      const double d = 1.0 - 0.5 * dt * centre_[k];
      const double c = -0.5 * dt * upper_[k];
      const double denom = k == 0 ? d : d - a * cprime_[k - 1];
      inv_denom_[k] = 1.0 / denom;
      cprime_[k] = c * inv_denom_[k];
    }
    factored_dt_ = dt;
  }

  void solve(std::vector<double>& rhs) {
    const std::size_t m = w_.size();
    const double half = 0.5 * factored_dt_;
    rhs[0] *= inv_denom_[0];
    for (std::size_t k = 1; k < m; ++k) rhs[k] = (rhs[k] + half * lower_[k] * rhs[k - 1]) * inv_denom_[k];
    w_[m - 1] = rhs[m - 1];
    for (std::size_t k = m - 1; k-- > 0;) w_[k] = rhs[k] - cprime_[k] * w_[k + 1];
  }

  double beta_;
  RadialGrid grid_;
  std::vector<double> lower_, centre_, upper_, bv_;
  std::vector<std::size_t> forced_;
  std::vector<double> erfc_prev_;
  std::vector<double> w_;
  std::vector<double> cprime_, inv_denom_;
  double dt_cap_ = 0.0;
  double factored_dt_ = -1.0;
  double time_ = 0.0;
};

inline RadialProfile solve_forced_heat(const Potential& p, double beta, double t, const SolverConfig& cfg) {
  ForcedHeatSolver solver(p, beta, t, cfg);
  solver.advance_to(t);
  RadialProfile prof = solver.profile();
  if (beta > 0.0) check_domain(prof);
  return prof;
}

/// One point (beta, t) of the radius surface.
struct MomentRecord {
  double beta = 0.0;
  double t = 0.0;
  double Z = 0.0;
  double m0 = 0.0;
  double m2 = 0.0;
  double r = 0.0;
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double chi = 0.0;
  Regime regime = Regime::extended;
};

/// Signed sqrt(lambda0(beta)), or NaN outside the validity window.
inline double signed_gamma(const Potential& p, double beta, const CriticalData& crit, const SpectralOptions& opts) {
  if (!(beta > 0.0) || std::abs(beta - crit.beta_cr) > opts.window * crit.beta_cr) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return lambda0(p, beta, crit, opts).k_root;
}

inline MomentRecord record_from_profile(const RadialProfile& prof, double gamma, double beta_cr) {
  MomentRecord rec;
  rec.beta = prof.beta;
  rec.t = prof.t;
  rec.m0 = 1.0 + prof.moment(0);
  rec.m2 = 3.0 * prof.t + prof.moment(2);
  rec.Z = rec.m0;
  rec.r = std::sqrt(rec.m2 / rec.m0);
  rec.gamma = gamma;
  const RegimeTag tag = classify_regime(prof.beta, prof.t, beta_cr);
  rec.chi = tag.chi;
  rec.regime = tag.regime;
  return rec;
}

inline MomentRecord moments(const Potential& p, double beta, double t, const SolverConfig& cfg,
                            const CriticalData& crit, const SpectralOptions& opts = {}) {
  const RadialProfile prof = solve_forced_heat(p, beta, t, cfg);
  return record_from_profile(prof, signed_gamma(p, beta, crit, opts), crit.beta_cr);
}

/// Moments at several increasing times from a single solve on the grid of
/// the largest time.
inline std::vector<MomentRecord> moments_series(const Potential& p, double beta, const std::vector<double>& times,
                                                const SolverConfig& cfg, const CriticalData& crit,
                                                const SpectralOptions& opts = {}) {
  if (times.empty()) return {};
  if (!std::is_sorted(times.begin(), times.end())) throw ValidationError("moments_series: times must be increasing");
  const double gamma = signed_gamma(p, beta, crit, opts);
  ForcedHeatSolver solver(p, beta, times.back(), cfg);
  std::vector<MomentRecord> out;
  out.reserve(times.size());
  for (double t : times) {
    solver.advance_to(t);
    const RadialProfile prof = solver.profile();
    if (beta > 0.0) check_domain(prof);
    out.push_back(record_from_profile(prof, gamma, crit.beta_cr));
  }
  return out;
}

/// Radial density of the end point, q(r) = p_beta(t, 0, r) / Z.
struct EndpointDensity {
  std::vector<double> r;
  std::vector<double> q;
  double Z = 0.0;
  double normalization = 0.0;  // 4 pi int q r^2 dr on the grid
};

inline EndpointDensity endpoint_density(const Potential& p, double beta, double t, const SolverConfig& cfg) {
  const RadialProfile prof = solve_forced_heat(p, beta, t, cfg);
  EndpointDensity d;
  d.Z = 1.0 + prof.moment(0);
  d.r = prof.grid.r;
  d.q.resize(d.r.size());
  double norm = 0.0;
  for (std::size_t i = 0; i < d.r.size(); ++i) {
    d.q[i] = (free_kernel(t, d.r[i]) + prof.u[i]) / d.Z;
    norm += prof.grid.weights[i] * d.r[i] * d.r[i] * d.q[i];
  }
  d.normalization = 4.0 * std::numbers::pi * norm;
  return d;
}

}  // namespace polymer
