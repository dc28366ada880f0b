#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "polymer/error.hpp"

namespace polymer {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }
};

/// Gauss-Legendre rule with n nodes on [a, b], nodes in increasing order.
/// Roots of P_n are found by Newton iteration from the Tricomi estimate.
inline QuadratureRule gauss_legendre(std::size_t n, double a, double b) {
  if (n == 0) throw ValidationError("gauss_legendre: n must be positive");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  const std::size_t m = (n + 1) / 2;
  const auto nd = static_cast<double>(n);
  for (std::size_t i = 0; i < m; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (nd + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const auto kd = static_cast<double>(k);
        const double p2 = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
        p0 = p1;
        p1 = p2;
      }
      dp = nd * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged root for the weight.
    double p0 = 1.0;
    double p1 = x;
    for (std::size_t k = 2; k <= n; ++k) {
      const auto kd = static_cast<double>(k);
      const double p2 = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
      p0 = p1;
      p1 = p2;
    }
    dp = nd * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // x is the i-th largest root.
    rule.nodes[n - 1 - i] = mid + half * x;
    rule.nodes[i] = mid - half * x;
    rule.weights[n - 1 - i] = half * w;
    rule.weights[i] = half * w;
  }
  return rule;
}

/// Composite Gauss-Legendre on [a, b] with `panels` equal panels of `order` nodes.
template <class F>
double integrate_composite(F&& f, double a, double b, std::size_t panels = 16,
                           std::size_t order = 16) {
  if (b <= a) return 0.0;
  const QuadratureRule ref = gauss_legendre(order, 0.0, 1.0);
  const double h = (b - a) / static_cast<double>(panels);
  double total = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = a + h * static_cast<double>(p);
    double s = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) s += ref.weights[i] * f(lo + h * ref.nodes[i]);
    total += h * s;
  }
  return total;
}

/// Same as integrate_composite but additionally splits [a, b] at every
/// breakpoint inside it (kinks or jumps of the integrand).
template <class F>
double integrate_piecewise(F&& f, double a, double b, std::span<const double> breakpoints,
                           std::size_t panels = 16, std::size_t order = 16) {
  double total = 0.0;
  double lo = a;
  for (double bp : breakpoints) {
    if (bp <= lo || bp >= b) continue;
    total += integrate_composite(f, lo, bp, panels, order);
    lo = bp;
  }
  return total + integrate_composite(f, lo, b, panels, order);
}

}  // namespace polymer
