#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "polymer/error.hpp"
#include "polymer/quadrature.hpp"

namespace polymer {

enum class PotentialKind { indicator, smooth_bump, tabulated };

inline std::string_view to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::indicator: return "indicator";
    case PotentialKind::smooth_bump: return "smooth_bump";
    case PotentialKind::tabulated: return "tabulated";
  }
  return "unknown";
}

inline PotentialKind parse_potential_kind(std::string_view name) {
  if (name == "indicator") return PotentialKind::indicator;
  if (name == "smooth_bump") return PotentialKind::smooth_bump;
  if (name == "tabulated") return PotentialKind::tabulated;
  throw ValidationError("unknown potential kind '" + std::string(name) + "'");
}

struct ProfileSample {
  double r;
  double v;
};

/// Radial, nonnegative, compactly supported attractive potential v(|x|).
///
/// Immutable after construction. Values vanish for r > b. The indicator is
/// closed (v(b) = amplitude); the bump and tabulated profiles are continuous
/// and vanish at b.
class Potential {
 public:
  static Potential indicator(double b, double amplitude = 1.0) {
    check_common(b, amplitude);
    return Potential(PotentialKind::indicator, b, amplitude, {});
  }

  /// amplitude * exp(1 - 1/(1 - (r/b)^2)) on r < b.
  static Potential smooth_bump(double b, double amplitude = 1.0) {
    check_common(b, amplitude);
    return Potential(PotentialKind::smooth_bump, b, amplitude, {});
  }

  /// Piecewise-linear profile through the samples, scaled by amplitude.
  /// Samples must start at r = 0, be strictly increasing in r, be
  /// nonnegative, and end with v = 0; the last radius becomes b.
  static Potential tabulated(std::vector<ProfileSample> samples, double amplitude = 1.0) {
    if (samples.size() < 2) throw ValidationError("tabulated potential needs at least 2 samples");
    if (samples.front().r != 0.0) throw ValidationError("tabulated potential must start at r = 0");
    bool any_positive = false;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& s = samples[i];
      if (!std::isfinite(s.r) || !std::isfinite(s.v)) {
        throw ValidationError("tabulated potential has non-finite sample");
      }
      if (s.v < 0.0) throw ValidationError("tabulated potential must be nonnegative");
      if (i > 0 && !(s.r > samples[i - 1].r)) {
        throw ValidationError("tabulated radii must be strictly increasing");
      }
      any_positive = any_positive || s.v > 0.0;
    }
    if (samples.back().v != 0.0) throw ValidationError("tabulated potential must end with v(b) = 0");
    if (!any_positive) throw ValidationError("potential is identically zero");
    const double b = samples.back().r;
    check_common(b, amplitude);
    return Potential(PotentialKind::tabulated, b, amplitude, std::move(samples));
  }

  PotentialKind kind() const noexcept { return kind_; }
  double support_radius() const noexcept { return b_; }
  double amplitude() const noexcept { return amplitude_; }
  const std::vector<ProfileSample>& samples() const noexcept { return samples_; }

  double operator()(double r) const noexcept { return evaluate(r); }

  double evaluate(double r) const noexcept {
    if (r > b_ || r < 0.0) return 0.0;
    switch (kind_) {
      case PotentialKind::indicator:
        return amplitude_;
      case PotentialKind::smooth_bump: {
        const double x = r / b_;
        const double gap = 1.0 - x * x;
        if (gap <= 0.0) return 0.0;
        return amplitude_ * std::exp(1.0 - 1.0 / gap);
      }
      case PotentialKind::tabulated: {
        auto it = std::upper_bound(samples_.begin(), samples_.end(), r,
                                   [](double x, const ProfileSample& s) { return x < s.r; });
        if (it == samples_.end()) return amplitude_ * samples_.back().v;
        const auto& hi = *it;
        const auto& lo = *(it - 1);
        const double f = (r - lo.r) / (hi.r - lo.r);
        return amplitude_ * (lo.v + f * (hi.v - lo.v));
      }
    }
    return 0.0;
  }

  double max_value() const noexcept {
    if (kind_ != PotentialKind::tabulated) return amplitude_;
    double m = 0.0;
    for (const auto& s : samples_) m = std::max(m, s.v);
    return amplitude_ * m;
  }

  /// Radii in (0, b] where v or its derivative is not smooth; quadrature
  /// routines split their intervals there.
  std::vector<double> breakpoints() const {
    std::vector<double> out;
    if (kind_ == PotentialKind::tabulated) {
      for (std::size_t i = 1; i < samples_.size(); ++i) out.push_back(samples_[i].r);
    } else {
      out.push_back(b_);
    }
    return out;
  }

  /// Mean of v over [lo, hi] (hi > lo), integrated piecewise over the
  /// smooth pieces of the profile.
  double cell_average(double lo, double hi) const {
    if (lo >= b_) return 0.0;
    const double top = std::min(hi, b_);
    const auto bps = breakpoints();
    const double s = integrate_piecewise([this](double r) { return evaluate(r); }, lo, top, bps, 1, 6);
    return s / (hi - lo);
  }

 private:
  Potential(PotentialKind kind, double b, double amplitude, std::vector<ProfileSample> samples)
      : kind_(kind), b_(b), amplitude_(amplitude), samples_(std::move(samples)) {}

  static void check_common(double b, double amplitude) {
    if (!(b > 0.0) || !std::isfinite(b)) throw ValidationError("support radius b must be positive");
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
      throw ValidationError("amplitude must be nonnegative");
    }
    if (amplitude == 0.0) throw ValidationError("potential is identically zero");
  }

  PotentialKind kind_;
  double b_;
  double amplitude_;
  std::vector<ProfileSample> samples_;
};

struct PotentialNorms {
  double integral;   // 4 pi int_0^b v(r) r^2 dr
  double max_value;  // sup v
};

inline PotentialNorms potential_norms(const Potential& p, std::size_t panels = 64) {
  const auto bps = p.breakpoints();
  const double radial = integrate_piecewise([&p](double r) { return p(r) * r * r; }, 0.0,
                                            p.support_radius(), bps, panels, 16);
  PotentialNorms norms{4.0 * std::numbers::pi * radial, p.max_value()};
  if (!(norms.integral > 0.0) || !(norms.max_value > 0.0)) {
    throw ValidationError("potential is identically zero");
  }
  return norms;
}

}  // namespace polymer
