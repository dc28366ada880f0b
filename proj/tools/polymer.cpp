// polymer: command-line front end.
//
//   polymer spectral --config c.ini      sigma0.csv + critical.json
//   polymer betacrit --config c.ini      critical.json, printed
//   polymer radius   --config c.ini --beta B --t T [--mc]
//   polymer sweep    --config c.ini      sweep.csv, alpha_minus.csv, report.json
//   polymer verify   --config c.ini      as sweep, plus the convergence guard
//   polymer density  --config c.ini --beta B --t T
//
// Exit codes: 0 ok, 1 module failure, 2 invalid input, 3 MC disagreement,
// 4 band or convergence-guard failure, 5 too many failed sweep points.

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "polymer/config.hpp"
#include "polymer/io.hpp"
#include "polymer/monte_carlo.hpp"
#include "polymer/scaling.hpp"
#include "polymer/spectral.hpp"

namespace {

using polymer::io::json;

enum Exit { kOk = 0, kFailure = 1, kInvalid = 2, kMcDisagree = 3, kBandFail = 4, kTooManyFailures = 5 };

struct Options {
  std::string config;
  std::size_t jobs = polymer::default_jobs();
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  double beta = 0.0;
  double t = 0.0;
  bool mc = false;
};

polymer::RunConfig load(const Options& o) {
  polymer::RunConfig cfg = polymer::load_config(o.config);
  if (o.out) cfg.output_directory = *o.out;
  if (o.seed) {
    cfg.solver.seed = *o.seed;
    cfg.sweep.solver.seed = *o.seed;
  }
  return cfg;
}

void write_if(bool enabled, const polymer::RunConfig& cfg, const std::string& name, const std::string& body) {
  if (enabled) polymer::io::atomic_write(cfg.output_directory / name, body);
}

int cmd_spectral(const Options& o) {
  const auto cfg = load(o);
  const auto crit = polymer::critical_data(cfg.potential, cfg.spectral);
  const auto ks = polymer::linear_grid(cfg.k_grid_min, cfg.k_grid_max, cfg.k_grid_count);
  const auto curve = polymer::spectral_curve(cfg.potential, ks, cfg.spectral, o.jobs);
  write_if(cfg.write_csv, cfg, "sigma0.csv", polymer::io::spectral_csv(curve));
  write_if(cfg.write_json, cfg, "critical.json", polymer::io::dump(polymer::io::to_json(crit)));
  std::printf("beta_cr = %.10g\nkappa   = %.10g (fit %.10g)\n", crit.beta_cr, crit.kappa, crit.kappa_fit);
  return kOk;
}

int cmd_betacrit(const Options& o) {
  const auto cfg = load(o);
  const auto crit = polymer::critical_data(cfg.potential, cfg.spectral);
  const std::string body = polymer::io::dump(polymer::io::to_json(crit));
  write_if(cfg.write_json, cfg, "critical.json", body);
  std::cout << body;
  return kOk;
}

int cmd_radius(const Options& o) {
  const auto cfg = load(o);
  const auto crit = polymer::critical_data(cfg.potential, cfg.spectral);
  const auto rec = polymer::moments(cfg.potential, o.beta, o.t, cfg.solver, crit, cfg.spectral);
  json j = polymer::io::to_json(rec);
  int code = kOk;
  if (o.mc) {
    const auto mc = polymer::feynman_kac_mc(cfg.potential, o.beta, o.t, cfg.solver, o.jobs);
    const double z_dev = std::abs(rec.Z - mc.Z.mean) / mc.Z.std_error;
    const double r_dev = std::abs(rec.r - mc.r) / mc.r_stderr;
    j["mc"] = polymer::io::to_json(mc);
    j["mc"]["Z_deviation_stderr"] = polymer::io::number(z_dev);
    j["mc"]["r_deviation_stderr"] = polymer::io::number(r_dev);
    // With zero spread (beta = 0, or v never reached) any difference counts.
    const bool agree_z = mc.Z.std_error > 0.0 ? z_dev <= 3.0 : std::abs(rec.Z - mc.Z.mean) <= 1e-9 * rec.Z;
    const bool agree_r = mc.r_stderr > 0.0 ? r_dev <= 3.0 : true;
    j["mc"]["agree"] = agree_z && agree_r;
    if (!(agree_z && agree_r)) code = kMcDisagree;
  }
  std::cout << polymer::io::dump(j);
  return code;
}

struct SweepOutcome {
  polymer::RegimeReport report;
  polymer::RunConfig cfg;
};

SweepOutcome run(const Options& o) {
  SweepOutcome s{{}, load(o)};
  s.cfg.sweep.crit = polymer::critical_data(s.cfg.potential, s.cfg.spectral);
  s.report = polymer::run_sweep(s.cfg.potential, s.cfg.sweep, s.cfg.spectral, o.jobs);
  return s;
}

std::string alpha_minus_csv(const polymer::RegimeReport& rep) {
  std::string s = "chi,alpha_minus,residual,points\n";
  for (const auto& f : rep.alpha_minus) {
    s += polymer::io::format_double(f.chi) + "," + polymer::io::format_double(f.alpha) + "," +
         polymer::io::format_double(f.residual) + "," + std::to_string(f.points) + "\n";
  }
  return s;
}

void write_sweep(const SweepOutcome& s, const json& report) {
  std::vector<polymer::MomentRecord> all = s.report.records;
  all.insert(all.end(), s.report.chi_records.begin(), s.report.chi_records.end());
  write_if(s.cfg.write_csv, s.cfg, "sweep.csv", polymer::io::sweep_csv(all, s.report.beta_cr));
  write_if(s.cfg.write_csv, s.cfg, "alpha_minus.csv", alpha_minus_csv(s.report));
  write_if(s.cfg.write_json, s.cfg, "report.json", polymer::io::dump(report));
}

void print_band(const char* name, const polymer::Band& b) {
  std::printf("  %-30s n=%-3zu min=%-10.5g max=%-10.5g ratio=%-8.4g %s\n", name, b.count, b.min, b.max, b.ratio(),
              b.empty() ? "empty" : (b.pass() ? "pass" : "FAIL"));
}

void print_summary(const polymer::RegimeReport& rep) {
  std::printf("beta_cr = %.8g\n", rep.beta_cr);
  std::printf("%10s %8s %12s %12s %10s %8s\n", "beta", "t", "Z", "r", "chi", "regime");
  for (const auto* list : {&rep.records, &rep.chi_records}) {
    for (const auto& r : *list) {
      std::printf("%10.6f %8.0f %12.6g %12.6g %10.4f %8s\n", r.beta, r.t, r.Z, r.r, r.chi,
                  std::string(polymer::to_string(r.regime)).c_str());
    }
  }
  print_band("band1 r*(beta-beta_cr)", rep.band1);
  print_band("band2 r/sqrt(t)", rep.band2);
  for (const auto& f : rep.alpha_plus) {
    if (f.ok) {
      std::printf("  alpha_plus(beta=%.6f) = %.6g\n", f.beta, f.alpha);
    } else {
      std::printf("  alpha_plus(beta=%.6f): %s\n", f.beta, f.message.c_str());
    }
  }
  for (const auto& f : rep.alpha_minus) {
    if (f.ok) {
      std::printf("  alpha_minus(chi=%g) = %.6g\n", f.chi, f.alpha);
    } else {
      std::printf("  alpha_minus(chi=%g): %s\n", f.chi, f.message.c_str());
    }
  }
  if (!rep.alpha_minus_monotone) std::printf("  note: alpha_minus profile is not decreasing in chi\n");
  for (const auto& f : rep.failures) std::printf("  failed point beta=%.6f t=%g: %s\n", f.beta, f.t, f.message.c_str());
}

int cmd_sweep(const Options& o) {
  const auto s = run(o);
  write_sweep(s, polymer::io::to_json(s.report));
  print_summary(s.report);
  return kOk;
}

int cmd_verify(const Options& o) {
  const auto s = run(o);
  // Guard point: the most strongly coupled row at its middle time.
  const auto& sw = s.cfg.sweep;
  double off = 0.0;
  for (double x : sw.beta_offsets) off = std::max(off, x);
  const double t_guard = sw.t_values.empty() ? 160.0 : sw.t_values[sw.t_values.size() / 2];
  const auto guard =
      polymer::convergence_guard(s.cfg.potential, s.report.beta_cr * (1.0 + off), t_guard, sw.solver, sw.crit);
  json j = polymer::io::to_json(s.report);
  j["convergence_guard"] = polymer::io::to_json(guard);
  const bool pass = s.report.pass() && guard.pass();
  j["verdict"] = pass ? "pass" : "fail";
  write_sweep(s, j);
  print_summary(s.report);
  std::printf("  convergence guard beta=%.6f t=%g: relative change %.3g (tolerance %.3g) %s\n", guard.beta, guard.t,
              guard.relative_change(), guard.tolerance, guard.pass() ? "pass" : "FAIL");
  std::printf("verdict: %s\n", pass ? "pass" : "fail");
  return pass ? kOk : kBandFail;
}

int cmd_density(const Options& o) {
  const auto cfg = load(o);
  const auto d = polymer::endpoint_density(cfg.potential, o.beta, o.t, cfg.solver);
  write_if(cfg.write_csv, cfg, "density.csv", polymer::io::density_csv(d));
  json j;
  j["beta"] = polymer::io::number(o.beta);
  j["t"] = polymer::io::number(o.t);
  j["Z"] = polymer::io::number(d.Z);
  j["normalization"] = polymer::io::number(d.normalization);
  std::cout << polymer::io::dump(j);
  return kOk;
}

int report_error(const std::string& kind, const std::string& message, int code) {
  json j;
  j["error"] = kind;
  j["message"] = message;
  j["exit_code"] = code;
  std::cerr << j.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pinned polymer in R^3: critical coupling, radius scaling and checks"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "run configuration (INI)")->required()->check(CLI::ExistingFile);
    sub->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", o.out, "output directory (overrides output.directory)");
    sub->add_option("--seed", o.seed, "random seed (overrides solver.seed)");
  };
  auto point = [&](CLI::App* sub) {
    sub->add_option("--beta", o.beta, "coupling")->required();
    sub->add_option("--t", o.t, "polymer length")->required();
  };

  auto* spectral = app.add_subcommand("spectral", "sigma0 curve and critical data");
  auto* betacrit = app.add_subcommand("betacrit", "critical coupling and curvature");
  auto* radius = app.add_subcommand("radius", "moments and radius at one (beta, t)");
  auto* sweep = app.add_subcommand("sweep", "full (beta, t) sweep");
  auto* verify = app.add_subcommand("verify", "sweep plus band and convergence verdicts");
  auto* density = app.add_subcommand("density", "end-point density at one (beta, t)");
  for (auto* sub : {spectral, betacrit, radius, sweep, verify, density}) common(sub);
  point(radius);
  point(density);
  radius->add_flag("--mc", o.mc, "Monte Carlo cross-check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("validation", e.what(), kInvalid);
  }

  try {
    if (*spectral) return cmd_spectral(o);
    if (*betacrit) return cmd_betacrit(o);
    if (*radius) return cmd_radius(o);
    if (*sweep) return cmd_sweep(o);
    if (*verify) return cmd_verify(o);
    if (*density) return cmd_density(o);
  } catch (const polymer::ValidationError& e) {
    return report_error(e.kind(), e.what(), kInvalid);
  } catch (const polymer::SweepError& e) {
    return report_error(e.kind(), e.what(), kTooManyFailures);
  } catch (const polymer::Error& e) {
    return report_error(e.kind(), e.what(), kFailure);
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), kFailure);
  }
  return kFailure;
}
