#pragma once

// Principal Birman-Schwinger eigenvalue sigma0(k) of -v R_{k^2,0} restricted
// to the ball B_b, and the quantities derived from it: the critical
// coupling, the eigenvalue/resonance branch lambda0(beta), the curvature
// constant kappa and the regularised quotient varsigma(k, beta).
//
// Only the spherically symmetric sector is discretised. For psi = r*phi the
// free resolvent reduces to the kernel
//
//   g(r, s) = 2 sinh(mu r_<) exp(-mu r_>) / mu,   mu = sqrt(2) k,
//
// (g = 2 r_< at k = 0), and the operator is discretised by Nystrom's method
// on Gauss-Legendre nodes in [0, b] with singularity subtraction on the
// diagonal, which restores fourth-order convergence despite the kink of g
// at r = s.

#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "polymer/error.hpp"
#include "polymer/parallel.hpp"
#include "polymer/potential.hpp"
#include "polymer/quadrature.hpp"

namespace polymer {

struct PowerIterationOptions {
  double rel_tol = 1e-12;
  std::size_t max_iterations = 100000;
};

struct SpectralOptions {
  std::size_t n_nodes = 400;
  // Half-width of the admissible |beta - beta_cr| interval, relative to beta_cr.
  double window = 0.25;
  // Root search interval for lambda0, in units of 1/b.
  double k_min = -2.0;
  double k_max = 10.0;
  double root_tol = 1e-10;
  // Finite-difference step for sigma0'(k), in units of 1/b.
  double fd_step = 1e-3;
  PowerIterationOptions power;
};

/// Reduced free-resolvent kernel of the l = 0 sector.
inline double reduced_green(double r, double s, double mu) noexcept {
  const double lo = std::min(r, s);
  const double hi = std::max(r, s);
  if (mu == 0.0) return 2.0 * lo;
  // 2 sinh(mu lo) e^{-mu hi} / mu, written to stay accurate for small |mu|.
  return std::exp(-mu * (hi - lo)) * (-std::expm1(-2.0 * mu * lo)) / mu;
}

/// int_0^b g(r, s) ds in closed form.
inline double reduced_green_row_integral(double r, double b, double mu) noexcept {
  if (mu == 0.0) return 2.0 * r * b - r * r;
  const double a = std::expm1(-mu * r);
  return (a * a + std::expm1(-2.0 * mu * r) * std::expm1(-mu * (b - r))) / (mu * mu);
}

/// Dense n x n Nystrom matrix together with the quadrature it was built on.
struct NystromKernel {
  double k = 0.0;
  std::size_t n = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> potential;  // v at the nodes
  std::vector<double> values;     // row-major
  bool symmetric = true;

  double operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }

  void apply(const std::vector<double>& x, std::vector<double>& y) const {
    y.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = values.data() + i * n;
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += row[j] * x[j];
      y[i] = s;
    }
  }
};

namespace detail {

inline void check_kernel_args(std::size_t n, double k) {
  if (n < 16) throw ValidationError("Nystrom discretisation needs n >= 16 nodes, got " + std::to_string(n));
  if (!std::isfinite(k)) throw ValidationError("wavenumber k must be finite");
}

// Common part of both discretisations: off-diagonal g_ij and the corrected
// diagonal c_i = G_i - sum_{j != i} w_j g_ij.
struct KernelParts {
  QuadratureRule rule;
  std::vector<double> v;
  std::vector<double> g;
  std::vector<double> diag;
};

inline KernelParts kernel_parts(const Potential& p, double k, std::size_t n) {
  check_kernel_args(n, k);
  KernelParts parts;
  const double b = p.support_radius();
  parts.rule = gauss_legendre(n, 0.0, b);
  const double mu = std::numbers::sqrt2 * k;
  parts.v.resize(n);
  parts.g.assign(n * n, 0.0);
  parts.diag.resize(n);
  for (std::size_t i = 0; i < n; ++i) parts.v[i] = p(parts.rule.nodes[i]);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double gij = reduced_green(parts.rule.nodes[i], parts.rule.nodes[j], mu);
      parts.g[i * n + j] = gij;
      parts.g[j * n + i] = gij;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double off = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) off += parts.rule.weights[j] * parts.g[i * n + j];
    }
    parts.diag[i] = reduced_green_row_integral(parts.rule.nodes[i], b, mu) - off;
  }
  for (double x : parts.g) {
    if (!std::isfinite(x)) throw ValidationError("kernel overflow: |k| too large for this support radius");
  }
  return parts;
}

}  // namespace detail

/// Symmetrised discretisation sqrt(v) (-R) sqrt(v); exactly symmetric.
/// Entry (i, j), i != j, is sqrt(v_i w_i) g(r_i, r_j) sqrt(v_j w_j); the
/// diagonal carries the singularity-subtracted row correction.
inline NystromKernel assemble_kernel(const Potential& p, double k, std::size_t n) {
  auto parts = detail::kernel_parts(p, k, n);
  NystromKernel K;
  K.k = k;
  K.n = n;
  K.symmetric = true;
  K.values.assign(n * n, 0.0);
  std::vector<double> sv(n);
  for (std::size_t i = 0; i < n; ++i) sv[i] = std::sqrt(parts.v[i] * parts.rule.weights[i]);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double x = sv[i] * parts.g[i * n + j] * sv[j];
      K.values[i * n + j] = x;
      K.values[j * n + i] = x;
    }
    K.values[i * n + i] = parts.v[i] * parts.diag[i];
  }
  K.nodes = std::move(parts.rule.nodes);
  K.weights = std::move(parts.rule.weights);
  K.potential = std::move(parts.v);
  return K;
}

/// Plain Nystrom discretisation of -v R_{k^2,0}: entry v_i w_j g_ij.
/// Similar to the symmetrised matrix wherever v > 0.
inline NystromKernel assemble_unsymmetrized_kernel(const Potential& p, double k, std::size_t n) {
  auto parts = detail::kernel_parts(p, k, n);
  NystromKernel K;
  K.k = k;
  K.n = n;
  K.symmetric = false;
  K.values.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      K.values[i * n + j] =
          i == j ? parts.v[i] * parts.diag[i] : parts.v[i] * parts.rule.weights[j] * parts.g[i * n + j];
    }
  }
  K.nodes = std::move(parts.rule.nodes);
  K.weights = std::move(parts.rule.weights);
  K.potential = std::move(parts.v);
  return K;
}

struct EigenPair {
  double value = 0.0;
  std::vector<double> vector;  // unit 2-norm, nonnegative sum
  std::size_t iterations = 0;
};

/// Dominant eigenpair of an entrywise nonnegative matrix. Uses the Rayleigh
/// quotient for symmetric kernels and the norm ratio otherwise; stops when
/// the estimate changes by less than rel_tol relative.
inline EigenPair power_iteration(const NystromKernel& K, const PowerIterationOptions& opts = {}) {
  const std::size_t n = K.n;
  std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> y;
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t it = 1; it <= opts.max_iterations; ++it) {
    K.apply(x, y);
    const double norm = std::sqrt(std::inner_product(y.begin(), y.end(), y.begin(), 0.0));
    if (!(norm > 0.0)) throw ConvergenceError("power iteration: operator annihilated the iterate");
    const double estimate = K.symmetric ? std::inner_product(x.begin(), x.end(), y.begin(), 0.0) : norm;
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / norm;
    if (std::abs(estimate - prev) <= opts.rel_tol * std::abs(estimate)) {
      EigenPair out;
      out.value = estimate;
      if (std::accumulate(x.begin(), x.end(), 0.0) < 0.0) {
        for (double& xi : x) xi = -xi;
      }
      out.vector = std::move(x);
      out.iterations = it;
      return out;
    }
    prev = estimate;
  }
  throw ConvergenceError("power iteration did not converge within " + std::to_string(opts.max_iterations) +
                         " iterations (degenerate top of spectrum?)");
}

struct PrincipalEigen {
  double k = 0.0;
  double sigma0 = 0.0;
  std::vector<double> radii;  // quadrature nodes on [0, b]
  std::vector<double> phi;    // nonnegative, sum_i w_i phi_i^2 = 1
  std::size_t iterations = 0;
};

inline PrincipalEigen sigma0(const Potential& p, double k, std::size_t n,
                             const PowerIterationOptions& opts = {}) {
  const NystromKernel K = assemble_kernel(p, k, n);
  EigenPair top = power_iteration(K, opts);
  PrincipalEigen out;
  out.k = k;
  out.sigma0 = top.value;
  out.iterations = top.iterations;
  out.radii = K.nodes;
  out.phi.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.phi[i] = top.vector[i] / std::sqrt(K.weights[i]);
  return out;
}

inline double sigma0_value(const Potential& p, double k, const SpectralOptions& opts) {
  return sigma0(p, k, opts.n_nodes, opts.power).sigma0;
}

/// d sigma0 / dk by central differences, one Richardson level (steps h, h/2).
inline double sigma0_derivative(const Potential& p, double k, const SpectralOptions& opts) {
  const double h = opts.fd_step / p.support_radius();
  auto central = [&](double step) {
    return (sigma0_value(p, k + step, opts) - sigma0_value(p, k - step, opts)) / (2.0 * step);
  };
  const double coarse = central(h);
  const double fine = central(0.5 * h);
  return (4.0 * fine - coarse) / 3.0;
}

struct CriticalData {
  double beta_cr = std::numeric_limits<double>::quiet_NaN();
  double kappa = std::numeric_limits<double>::quiet_NaN();
  double sigma0_prime_at_0 = std::numeric_limits<double>::quiet_NaN();
  // kappa from the quadratic fit of lambda0(beta) / (beta - beta_cr)^2.
  double kappa_fit = std::numeric_limits<double>::quiet_NaN();
  std::size_t n_nodes = 0;
};

/// beta_cr = 1 / sigma0(0). Only beta_cr and n_nodes are filled.
inline CriticalData beta_critical(const Potential& p, const SpectralOptions& opts = {}) {
  CriticalData crit;
  crit.beta_cr = 1.0 / sigma0_value(p, 0.0, opts);
  crit.n_nodes = opts.n_nodes;
  return crit;
}

enum class Branch { eigenvalue, resonance, critical };

inline std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::eigenvalue: return "eigenvalue";
    case Branch::resonance: return "resonance";
    case Branch::critical: return "critical";
  }
  return "unknown";
}

struct Lambda0 {
  double k_root = 0.0;   // signed; negative on the resonance side
  double lambda0 = 0.0;  // k_root^2
  Branch branch = Branch::critical;
};

/// Solves 1/beta = sigma0(k) for real k. sigma0 is strictly decreasing, so
/// the sign of sigma0(0) - 1/beta selects the half-line holding the root.
inline Lambda0 lambda0(const Potential& p, double beta, const CriticalData& crit,
                       const SpectralOptions& opts = {}) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("lambda0: beta must be positive");
  if (std::abs(beta - crit.beta_cr) > opts.window * crit.beta_cr) {
    throw BracketError("lambda0: beta = " + std::to_string(beta) + " lies outside the validity window |beta - beta_cr| <= " +
                       std::to_string(opts.window) + " * beta_cr");
  }
  SpectralOptions local = opts;
  local.n_nodes = crit.n_nodes == 0 ? opts.n_nodes : crit.n_nodes;
  const double target = 1.0 / beta;
  auto f = [&](double k) { return sigma0_value(p, k, local) - target; };
  const double b = p.support_radius();
  const double f0 = f(0.0);
  Lambda0 out;
  if (std::abs(f0) <= 8.0 * std::numeric_limits<double>::epsilon() * target) return out;

  const double edge = f0 > 0.0 ? local.k_max / b : local.k_min / b;
  const double f_edge = f(edge);
  if ((f0 > 0.0) == (f_edge > 0.0)) {
    throw BracketError("lambda0: no root of 1/beta = sigma0(k) for k between 0 and " + std::to_string(edge));
  }
  const double tol = local.root_tol;
  auto stop = [tol](double a, double c) { return std::abs(c - a) <= tol; };
  std::uintmax_t max_iter = 200;
  const double lo = std::min(0.0, edge);
  const double hi = std::max(0.0, edge);
  const double f_lo = lo == 0.0 ? f0 : f_edge;
  const double f_hi = hi == 0.0 ? f0 : f_edge;
  const auto [a, c] = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, stop, max_iter);
  out.k_root = 0.5 * (a + c);
  out.lambda0 = out.k_root * out.k_root;
  if (out.k_root > tol) {
    out.branch = Branch::eigenvalue;
  } else if (out.k_root < -tol) {
    out.branch = Branch::resonance;
  } else {
    out.branch = Branch::critical;
  }
  return out;
}

struct KappaEstimate {
  double kappa = 0.0;              // (beta_cr^2 sigma0'(0))^-2
  double sigma0_prime_at_0 = 0.0;  // finite difference + Richardson
  double kappa_fit = 0.0;          // quadratic-law fit of lambda0
};

/// Curvature constant of lambda0(beta) ~ kappa (beta - beta_cr)^2, by two
/// independent routes. Throws if they disagree by more than 5 %.
inline KappaEstimate kappa(const Potential& p, const CriticalData& crit, const SpectralOptions& opts = {}) {
  SpectralOptions local = opts;
  local.n_nodes = crit.n_nodes == 0 ? opts.n_nodes : crit.n_nodes;
  KappaEstimate est;
  est.sigma0_prime_at_0 = sigma0_derivative(p, 0.0, local);
  const double slope = crit.beta_cr * crit.beta_cr * est.sigma0_prime_at_0;
  est.kappa = 1.0 / (slope * slope);

  // Least squares of lambda0/d^2 = kappa + c d over the four offsets d.
  const double offsets[] = {-0.02, -0.01, 0.01, 0.02};
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (double rel : offsets) {
    const double d = rel * crit.beta_cr;
    const double y = lambda0(p, crit.beta_cr + d, crit, local).lambda0 / (d * d);
    sx += d;
    sy += y;
    sxx += d * d;
    sxy += d * y;
  }
  const double m = 4.0;
  const double c = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  est.kappa_fit = (sy - c * sx) / m;

  if (!(est.kappa > 0.0) || !(est.sigma0_prime_at_0 < 0.0)) {
    throw ConvergenceError("kappa: expected sigma0'(0) < 0");
  }
  if (std::abs(est.kappa_fit - est.kappa) > 0.05 * est.kappa) {
    throw ConvergenceError("kappa: finite-difference (" + std::to_string(est.kappa) + ") and fit (" +
                           std::to_string(est.kappa_fit) + ") estimates disagree; increase n_nodes");
  }
  return est;
}

/// beta_cr, kappa and sigma0'(0) in one record.
inline CriticalData critical_data(const Potential& p, const SpectralOptions& opts = {}) {
  CriticalData crit = beta_critical(p, opts);
  const KappaEstimate est = kappa(p, crit, opts);
  crit.kappa = est.kappa;
  crit.kappa_fit = est.kappa_fit;
  crit.sigma0_prime_at_0 = est.sigma0_prime_at_0;
  return crit;
}

/// (1/beta - sigma0(k)) / (k - k_root(beta)), continued by -sigma0'(k) at
/// the removable zero.
inline double varsigma(const Potential& p, double k, double beta, const CriticalData& crit,
                       const SpectralOptions& opts = {}) {
  SpectralOptions local = opts;
  local.n_nodes = crit.n_nodes == 0 ? opts.n_nodes : crit.n_nodes;
  const double k_root = lambda0(p, beta, crit, local).k_root;
  if (std::abs(k - k_root) < 1e-6) return -sigma0_derivative(p, k, local);
  return (1.0 / beta - sigma0_value(p, k, local)) / (k - k_root);
}

/// sigma0 sampled on a k grid, with Perron eigenfunctions.
struct SpectralCurve {
  std::vector<double> k;
  std::vector<double> sigma0;
  std::vector<double> radii;
  std::vector<std::vector<double>> eigenfunctions;
  std::size_t n_nodes = 0;
};

inline SpectralCurve spectral_curve(const Potential& p, const std::vector<double>& ks,
                                    const SpectralOptions& opts = {}, std::size_t jobs = 1) {
  SpectralCurve curve;
  curve.k = ks;
  curve.n_nodes = opts.n_nodes;
  curve.sigma0.resize(ks.size());
  curve.eigenfunctions.resize(ks.size());
  parallel_for(ks.size(), jobs, [&](std::size_t i) {
    PrincipalEigen e = sigma0(p, ks[i], opts.n_nodes, opts.power);
    curve.sigma0[i] = e.sigma0;
    curve.eigenfunctions[i] = std::move(e.phi);
  });
  curve.radii = gauss_legendre(opts.n_nodes, 0.0, p.support_radius()).nodes;
  return curve;
}

/// Evenly spaced k grid with `count` points on [lo, hi].
inline std::vector<double> linear_grid(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return out;
}

}  // namespace polymer
