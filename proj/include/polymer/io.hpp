#pragma once

// CSV/JSON rendering of the result types and atomic file output. CSV
// numbers carry 17 significant digits so values round-trip exactly.

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "polymer/error.hpp"
#include "polymer/monte_carlo.hpp"
#include "polymer/propagator.hpp"
#include "polymer/scaling.hpp"
#include "polymer/spectral.hpp"

namespace polymer::io {

using json = nlohmann::ordered_json;

inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// JSON has no NaN; non-finite values become null.
inline json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

/// JSON numbers use the shortest form that round-trips to the same double.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

/// Writes to a temporary sibling and renames it into place.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io", "cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw Error("io", "failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline constexpr const char* kMomentHeader = "beta,t,Z,m0,m2,r,gamma,chi,regime";
inline constexpr const char* kSweepHeader = "beta,t,Z,m0,m2,r,gamma,chi,regime,band_ratio";

inline std::string moment_row(const MomentRecord& rec) {
  std::string s;
  for (double x : {rec.beta, rec.t, rec.Z, rec.m0, rec.m2, rec.r, rec.gamma, rec.chi}) {
    s += format_double(x);
    s += ',';
  }
  s += to_string(rec.regime);
  return s;
}

inline std::string moments_csv(const std::vector<MomentRecord>& recs) {
  std::string s = std::string(kMomentHeader) + "\n";
  for (const auto& r : recs) s += moment_row(r) + "\n";
  return s;
}

inline std::string sweep_csv(const std::vector<MomentRecord>& recs, double beta_cr) {
  std::string s = std::string(kSweepHeader) + "\n";
  for (const auto& r : recs) s += moment_row(r) + "," + format_double(band_ratio(r, beta_cr)) + "\n";
  return s;
}

inline std::string spectral_csv(const SpectralCurve& curve) {
  std::string s = "k,sigma0\n";
  for (std::size_t i = 0; i < curve.k.size(); ++i) {
    s += format_double(curve.k[i]) + "," + format_double(curve.sigma0[i]) + "\n";
  }
  return s;
}

inline std::string density_csv(const EndpointDensity& d) {
  std::string s = "r,q\n";
  for (std::size_t i = 0; i < d.r.size(); ++i) s += format_double(d.r[i]) + "," + format_double(d.q[i]) + "\n";
  return s;
}

inline json to_json(const CriticalData& c) {
  json j;
  j["beta_cr"] = number(c.beta_cr);
  j["kappa"] = number(c.kappa);
  j["sigma0_prime0"] = number(c.sigma0_prime_at_0);
  j["kappa_fit"] = number(c.kappa_fit);
  j["n_nodes"] = c.n_nodes;
  return j;
}

inline json to_json(const CriticalData& c, const SpectralCurve& curve) {
  json j = to_json(c);
  j["k"] = curve.k;
  j["sigma0"] = curve.sigma0;
  return j;
}

inline json to_json(const MomentRecord& r) {
  json j;
  j["beta"] = number(r.beta);
  j["t"] = number(r.t);
  j["Z"] = number(r.Z);
  j["m0"] = number(r.m0);
  j["m2"] = number(r.m2);
  j["r"] = number(r.r);
  j["gamma"] = number(r.gamma);
  j["chi"] = number(r.chi);
  j["regime"] = std::string(to_string(r.regime));
  return j;
}

inline json to_json(const McResult& mc) {
  json j;
  j["Z"] = {{"mean", number(mc.Z.mean)}, {"stderr", number(mc.Z.std_error)}, {"n_paths", mc.Z.n_paths}};
  j["m2"] = {{"mean", number(mc.m2.mean)}, {"stderr", number(mc.m2.std_error)}, {"n_paths", mc.m2.n_paths}};
  j["r"] = number(mc.r);
  j["r_stderr"] = number(mc.r_stderr);
  j["step"] = number(mc.step);
  j["under_resolved"] = mc.under_resolved;
  return j;
}

inline json to_json(const Band& b) {
  json j;
  j["count"] = b.count;
  j["min"] = number(b.min);
  j["max"] = number(b.max);
  j["ratio"] = number(b.ratio());
  j["bound"] = number(b.bound);
  j["verdict"] = b.empty() ? "empty" : (b.pass() ? "pass" : "fail");
  return j;
}

inline json to_json(const RegimeReport& rep) {
  json j;
  j["verdict"] = rep.pass() ? "pass" : "fail";
  j["beta_cr"] = number(rep.beta_cr);
  j["band1"] = to_json(rep.band1);
  j["band1"]["quantity"] = "r*(beta-beta_cr) over chi>=1";
  j["band2"] = to_json(rep.band2);
  j["band2"]["quantity"] = "r/sqrt(t) over chi<=1";
  j["alpha_plus"] = json::array();
  for (const auto& f : rep.alpha_plus) {
    json e;
    e["beta"] = number(f.beta);
    e["alpha"] = number(f.alpha);
    e["residual"] = number(f.residual);
    e["ok"] = f.ok;
    if (!f.ok) e["message"] = f.message;
    j["alpha_plus"].push_back(e);
  }
  j["alpha_minus"] = json::array();
  for (const auto& f : rep.alpha_minus) {
    json e;
    e["chi"] = number(f.chi);
    e["alpha"] = number(f.alpha);
    e["residual"] = number(f.residual);
    e["points"] = f.points;
    e["ok"] = f.ok;
    if (!f.ok) e["message"] = f.message;
    j["alpha_minus"].push_back(e);
  }
  j["alpha_minus_monotone"] = rep.alpha_minus_monotone;
  j["chi_boundary"] = "chi = 1 tagged globular, counted in both bands";
  j["failures"] = json::array();
  for (const auto& f : rep.failures) {
    j["failures"].push_back({{"beta", number(f.beta)}, {"t", number(f.t)}, {"message", f.message}});
  }
  return j;
}

inline json to_json(const ConvergenceGuard& g) {
  json j;
  j["beta"] = number(g.beta);
  j["t"] = number(g.t);
  j["r"] = number(g.r_coarse);
  j["r_refined"] = number(g.r_fine);
  j["relative_change"] = number(g.relative_change());
  j["tolerance"] = number(g.tolerance);
  j["verdict"] = g.pass() ? "pass" : "fail";
  return j;
}

}  // namespace polymer::io
