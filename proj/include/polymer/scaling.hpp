#pragma once

// Sweeps of the (beta, t) plane and checks of the two-band scaling law
//   r ~ (beta - beta_cr)^-1   for chi = (beta - beta_cr) sqrt(t) >= 1,
//   r ~ sqrt(t)               for chi <= 1,
// plus pointwise estimates of the coefficients alpha_+(beta) and
// alpha_-(chi).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "polymer/error.hpp"
#include "polymer/parallel.hpp"
#include "polymer/propagator.hpp"
#include "polymer/regime.hpp"
#include "polymer/spectral.hpp"

namespace polymer {

struct SweepSpec {
  // (beta - beta_cr) / beta_cr for the rectangular grid.
  std::vector<double> beta_offsets{-0.1, -0.05, -0.02, 0.0, 0.02, 0.05, 0.1};
  std::vector<double> t_values{10.0, 40.0, 160.0, 640.0, 2560.0};
  // Fixed-chi rows: beta = beta_cr + chi / sqrt(t) for every t in chi_t_values.
  std::vector<double> chi_values{-3.0, 0.0, 1.0};
  std::vector<double> chi_t_values{100.0, 400.0, 1600.0};
  SolverConfig solver;
  CriticalData crit;
  double band_bound = 10.0;
  double max_failure_fraction = 0.1;

  void validate(const SpectralOptions& opts) const {
    solver.validate();
    if (!(crit.beta_cr > 0.0)) throw ValidationError("sweep: critical data not computed");
    for (double off : beta_offsets) {
      if (std::abs(off) > opts.window) throw ValidationError("sweep: beta offset outside the validity window");
    }
    auto strictly_increasing = [](const std::vector<double>& v) {
      for (std::size_t i = 1; i < v.size(); ++i) {
        if (!(v[i] > v[i - 1])) return false;
      }
      return true;
    };
    if (!strictly_increasing(t_values) || !strictly_increasing(chi_t_values)) {
      throw ValidationError("sweep: t values must be strictly increasing");
    }
    for (double t : t_values) {
      if (!(t > 0.0)) throw ValidationError("sweep: t values must be positive");
    }
    for (double t : chi_t_values) {
      if (!(t > 0.0)) throw ValidationError("sweep: t values must be positive");
    }
    if (!(band_bound > 1.0)) throw ValidationError("sweep: band bound must exceed 1");
  }
};

struct SweepFailure {
  double beta;
  double t;
  std::string message;
};

/// Extremes of a normalised radius over one scaling band.
struct Band {
  std::size_t count = 0;
  double min = std::numeric_limits<double>::quiet_NaN();
  double max = std::numeric_limits<double>::quiet_NaN();
  double bound = 10.0;

  bool empty() const noexcept { return count == 0; }
  double ratio() const noexcept { return empty() ? std::numeric_limits<double>::quiet_NaN() : max / min; }
  // An empty band imposes no constraint.
  bool pass() const noexcept { return empty() || (min > 0.0 && max / min <= bound); }
};

struct AlphaPlusFit {
  double beta = 0.0;
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();
  bool ok = false;
  std::string message;
};

struct AlphaMinusFit {
  double chi = 0.0;
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();
  std::size_t points = 0;
  bool ok = false;
  std::string message;
};

struct RegimeReport {
  double beta_cr = 0.0;
  std::vector<MomentRecord> records;      // rectangular grid, sorted by (beta, t)
  std::vector<MomentRecord> chi_records;  // fixed-chi rows, sorted by (chi, t)
  std::vector<SweepFailure> failures;
  Band band1;  // r (beta - beta_cr) over chi >= 1
  Band band2;  // r / sqrt(t) over chi <= 1
  std::vector<AlphaPlusFit> alpha_plus;
  std::vector<AlphaMinusFit> alpha_minus;
  // alpha_- decreasing in chi over the fitted profile; a finding, not a gate.
  bool alpha_minus_monotone = true;

  bool pass() const noexcept { return band1.pass() && band2.pass(); }
};

/// Normalised radius used by the band of the record's regime.
inline double band_ratio(const MomentRecord& rec, double beta_cr) {
  return rec.regime == Regime::globular ? rec.r * (rec.beta - beta_cr) : rec.r / std::sqrt(rec.t);
}

inline void fill_bands(RegimeReport& report, double bound) {
  report.band1 = Band{};
  report.band2 = Band{};
  report.band1.bound = bound;
  report.band2.bound = bound;
  auto add = [](Band& band, double x) {
    band.min = band.count == 0 ? x : std::min(band.min, x);
    band.max = band.count == 0 ? x : std::max(band.max, x);
    ++band.count;
  };
  for (const auto& rec : report.records) {
    if (rec.chi >= 1.0) add(report.band1, rec.r * (rec.beta - report.beta_cr));
    if (rec.chi <= 1.0) add(report.band2, rec.r / std::sqrt(rec.t));
  }
}

/// alpha_+(beta): r (beta - beta_cr) extrapolated to 1/(gamma^2 t) -> 0 by
/// the line through the two largest-t globular points with gamma^2 t >= 4.
/// At least three such points are required per beta.
inline std::vector<AlphaPlusFit> fit_alpha_plus(const RegimeReport& report) {
  std::map<double, std::vector<const MomentRecord*>> rows;
  for (const auto& rec : report.records) {
    if (rec.beta > report.beta_cr) rows[rec.beta];
    if (rec.beta > report.beta_cr && rec.chi >= 1.0 && std::isfinite(rec.gamma) &&
        rec.gamma * rec.gamma * rec.t >= 4.0) {
      rows[rec.beta].push_back(&rec);
    }
  }
  std::vector<AlphaPlusFit> out;
  for (auto& [beta, pts] : rows) {
    AlphaPlusFit fit;
    fit.beta = beta;
    if (pts.size() < 3) {
      fit.message = "needs >= 3 globular points with gamma^2 t >= 4, have " + std::to_string(pts.size());
      out.push_back(fit);
      continue;
    }
    std::sort(pts.begin(), pts.end(), [](auto* a, auto* b) { return a->t < b->t; });
    auto coords = [&](const MomentRecord* rec) {
      return std::pair{1.0 / (rec->gamma * rec->gamma * rec->t), rec->r * (rec->beta - report.beta_cr)};
    };
    const auto [x1, y1] = coords(pts[pts.size() - 1]);
    const auto [x2, y2] = coords(pts[pts.size() - 2]);
    const auto [x3, y3] = coords(pts[pts.size() - 3]);
    const double slope = (y2 - y1) / (x2 - x1);
    fit.alpha = y1 - slope * x1;
    fit.residual = std::abs(y3 - (fit.alpha + slope * x3));
    fit.ok = true;
    out.push_back(fit);
  }
  return out;
}

/// alpha_-(chi): r / sqrt(t) extrapolated linearly in 1/sqrt(t) (least
/// squares) over the fixed-chi records. Records are grouped by chi with a
/// 1e-9 matching tolerance; a group needs at least three t values.
inline std::vector<AlphaMinusFit> fit_alpha_minus(const RegimeReport& report) {
  std::vector<const MomentRecord*> recs;
  for (const auto& rec : report.chi_records) recs.push_back(&rec);
  std::sort(recs.begin(), recs.end(), [](auto* a, auto* b) { return a->chi < b->chi || (a->chi == b->chi && a->t < b->t); });
  std::vector<AlphaMinusFit> out;
  std::size_t i = 0;
  while (i < recs.size()) {
    std::size_t j = i + 1;
    while (j < recs.size() && std::abs(recs[j]->chi - recs[i]->chi) <= 1e-9) ++j;
    AlphaMinusFit fit;
    fit.chi = recs[i]->chi;
    fit.points = j - i;
    if (fit.points < 3) {
      fit.message = "chi not matched across >= 3 t values within 1e-9";
    } else {
      double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
      const auto m = static_cast<double>(fit.points);
      for (std::size_t k = i; k < j; ++k) {
        const double x = 1.0 / std::sqrt(recs[k]->t);
        const double y = recs[k]->r / std::sqrt(recs[k]->t);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
      }
      const double denom = m * sxx - sx * sx;
      const double slope = denom == 0.0 ? 0.0 : (m * sxy - sx * sy) / denom;
      fit.alpha = (sy - slope * sx) / m;
      double ss = 0.0;
      for (std::size_t k = i; k < j; ++k) {
        const double x = 1.0 / std::sqrt(recs[k]->t);
        const double e = recs[k]->r / std::sqrt(recs[k]->t) - (fit.alpha + slope * x);
        ss += e * e;
      }
      fit.residual = std::sqrt(ss / m);
      fit.ok = true;
    }
    out.push_back(fit);
    i = j;
  }
  return out;
}

inline bool is_decreasing(const std::vector<AlphaMinusFit>& profile) {
  const AlphaMinusFit* prev = nullptr;
  for (const auto& fit : profile) {
    if (!fit.ok) continue;
    if (prev && !(fit.alpha < prev->alpha)) return false;
    prev = &fit;
  }
  return true;
}

/// Runs every (beta, t) point of the spec. Rows of the rectangular grid are
/// solved once up to their largest t; a failing row is retried point by
/// point so that failures are isolated. Throws SweepError when more than
/// max_failure_fraction of the points fail.
inline RegimeReport run_sweep(const Potential& p, const SweepSpec& spec, const SpectralOptions& opts = {},
                              std::size_t jobs = 1) {
  spec.validate(opts);
  const double bc = spec.crit.beta_cr;
  const std::size_t n_rows = spec.beta_offsets.size();
  const std::size_t n_chi = spec.chi_values.size() * spec.chi_t_values.size();

  std::vector<std::vector<MomentRecord>> row_records(n_rows);
  std::vector<std::vector<SweepFailure>> row_failures(n_rows);
  std::vector<std::vector<MomentRecord>> chi_records(n_chi);
  std::vector<std::vector<SweepFailure>> chi_failures(n_chi);

  parallel_for(n_rows + n_chi, jobs, [&](std::size_t job) {
    if (job < n_rows) {
      const double beta = bc * (1.0 + spec.beta_offsets[job]);
      try {
        row_records[job] = moments_series(p, beta, spec.t_values, spec.solver, spec.crit, opts);
      } catch (const Error&) {
        row_records[job].clear();
        for (double t : spec.t_values) {
          try {
            row_records[job].push_back(moments(p, beta, t, spec.solver, spec.crit, opts));
          } catch (const Error& e) {
            row_failures[job].push_back({beta, t, e.what()});
          }
        }
      }
      return;
    }
    const std::size_t k = job - n_rows;
    const double chi = spec.chi_values[k / spec.chi_t_values.size()];
    const double t = spec.chi_t_values[k % spec.chi_t_values.size()];
    const double beta = bc + chi / std::sqrt(t);
    try {
      chi_records[k].push_back(moments(p, beta, t, spec.solver, spec.crit, opts));
    } catch (const Error& e) {
      chi_failures[k].push_back({beta, t, e.what()});
    }
  });

  RegimeReport report;
  report.beta_cr = bc;
  for (auto& v : row_records) report.records.insert(report.records.end(), v.begin(), v.end());
  for (auto& v : chi_records) report.chi_records.insert(report.chi_records.end(), v.begin(), v.end());
  for (auto& v : row_failures) report.failures.insert(report.failures.end(), v.begin(), v.end());
  for (auto& v : chi_failures) report.failures.insert(report.failures.end(), v.begin(), v.end());
  std::sort(report.records.begin(), report.records.end(),
            [](const auto& a, const auto& b) { return a.beta < b.beta || (a.beta == b.beta && a.t < b.t); });

  const std::size_t total = n_rows * spec.t_values.size() + n_chi;
  if (total > 0 && static_cast<double>(report.failures.size()) > spec.max_failure_fraction * static_cast<double>(total)) {
    std::string msg = std::to_string(report.failures.size()) + " of " + std::to_string(total) + " sweep points failed:";
    for (const auto& f : report.failures) msg += " (beta=" + std::to_string(f.beta) + ", t=" + std::to_string(f.t) + ")";
    throw SweepError(msg);
  }

  fill_bands(report, spec.band_bound);
  report.alpha_plus = fit_alpha_plus(report);
  report.alpha_minus = fit_alpha_minus(report);
  report.alpha_minus_monotone = is_decreasing(report.alpha_minus);
  std::sort(report.chi_records.begin(), report.chi_records.end(),
            [](const auto& a, const auto& b) { return a.chi < b.chi || (a.chi == b.chi && a.t < b.t); });
  return report;
}

struct ConvergenceGuard {
  double beta = 0.0;
  double t = 0.0;
  double r_coarse = 0.0;
  double r_fine = 0.0;
  double tolerance = 0.002;

  double relative_change() const { return std::abs(r_fine - r_coarse) / r_fine; }
  bool pass() const { return relative_change() < tolerance; }
};

/// Compares r(beta, t) at the configured resolution with dr and dt halved.
inline ConvergenceGuard convergence_guard(const Potential& p, double beta, double t, const SolverConfig& cfg,
                                          const CriticalData& crit) {
  ConvergenceGuard g;
  g.beta = beta;
  g.t = t;
  SolverConfig fine = cfg;
  fine.dr *= 0.5;
  const double peak = beta * p.max_value();
  fine.dt = 0.5 * (peak > 0.0 ? std::min(cfg.dt, 0.1 / peak) : cfg.dt);
  const auto coarse_prof = solve_forced_heat(p, beta, t, cfg);
  const auto fine_prof = solve_forced_heat(p, beta, t, fine);
  g.r_coarse = record_from_profile(coarse_prof, 0.0, crit.beta_cr).r;
  g.r_fine = record_from_profile(fine_prof, 0.0, crit.beta_cr).r;
  return g;
}

}  // namespace polymer
