#pragma once

// Run configuration: an INI file whose sections map to dotted keys
// (`[potential]` + `kind = indicator` is `potential.kind`). Unknown
// sections and keys are rejected.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdint>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "polymer/error.hpp"
#include "polymer/potential.hpp"
#include "polymer/propagator.hpp"
#include "polymer/scaling.hpp"
#include "polymer/spectral.hpp"

namespace polymer {

struct RunConfig {
  Potential potential = Potential::indicator(1.0, 1.0);
  SpectralOptions spectral;
  double k_grid_min = -1.0;  // absolute wavenumbers
  double k_grid_max = 10.0;
  std::size_t k_grid_count = 45;
  SolverConfig solver;
  SweepSpec sweep;  // crit is filled at run time
  std::filesystem::path output_directory = "out";
  bool write_csv = true;
  bool write_json = true;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

inline double parse_double(const std::string& key, std::string_view text) {
  const std::string s = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ValidationError("config: " + key + " expects a number, got '" + s + "'");
  }
  return value;
}

inline std::uint64_t parse_uint(const std::string& key, std::string_view text) {
  const std::string s = trim(text);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ValidationError("config: " + key + " expects a nonnegative integer, got '" + s + "'");
  }
  return value;
}

inline std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find(sep, start);
    const auto piece = trim(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (!piece.empty()) out.push_back(piece);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::vector<double> parse_list(const std::string& key, std::string_view text) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_double(key, item));
  return out;
}

}  // namespace detail

/// Parses an already-loaded flat key/value map (keys are dotted).
inline RunConfig parse_config(const std::map<std::string, std::string>& kv) {
  static const std::set<std::string> known = {
      "potential.kind",       "potential.b",           "potential.amplitude",  "potential.samples",
      "spectral.n_nodes",     "spectral.window",       "spectral.k_grid_min",  "spectral.k_grid_max",
      "spectral.k_grid_count", "solver.dr",            "solver.dt",            "solver.domain_factor",
      "solver.stretch",       "solver.mc_paths",       "solver.mc_step",       "solver.seed",
      "sweep.beta_offsets",   "sweep.t_values",        "sweep.chi_values",     "sweep.chi_t_values",
      "sweep.band_bound",     "output.directory",      "output.formats"};
  for (const auto& [key, value] : kv) {
    if (!known.contains(key)) throw ValidationError("config: unknown key '" + key + "'");
  }
  auto get = [&](const std::string& key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  auto num = [&](const std::string& key, double fallback) {
    const auto* s = get(key);
    return s ? detail::parse_double(key, *s) : fallback;
  };
  auto list = [&](const std::string& key, const std::vector<double>& fallback) {
    const auto* s = get(key);
    return s ? detail::parse_list(key, *s) : fallback;
  };

  RunConfig cfg;
  const auto kind = parse_potential_kind(get("potential.kind") ? detail::trim(*get("potential.kind")) : "indicator");
  const double amplitude = num("potential.amplitude", 1.0);
  if (kind == PotentialKind::tabulated) {
    const auto* raw = get("potential.samples");
    if (!raw) throw ValidationError("config: potential.samples is required for a tabulated potential");
    std::vector<ProfileSample> samples;
    for (const auto& pair : detail::split(*raw, ',')) {
      const auto parts = detail::split(pair, ':');
      if (parts.size() != 2) throw ValidationError("config: potential.samples entries must be 'r:v'");
      samples.push_back({detail::parse_double("potential.samples", parts[0]),
                         detail::parse_double("potential.samples", parts[1])});
    }
    cfg.potential = Potential::tabulated(std::move(samples), amplitude);
    if (get("potential.b") && num("potential.b", 0.0) != cfg.potential.support_radius()) {
      throw ValidationError("config: potential.b must equal the last sample radius");
    }
  } else {
    if (get("potential.samples")) throw ValidationError("config: potential.samples only applies to kind = tabulated");
    const double b = num("potential.b", 1.0);
    cfg.potential = kind == PotentialKind::indicator ? Potential::indicator(b, amplitude)
                                                     : Potential::smooth_bump(b, amplitude);
  }
  const double b = cfg.potential.support_radius();

  if (const auto* s = get("spectral.n_nodes")) cfg.spectral.n_nodes = detail::parse_uint("spectral.n_nodes", *s);
  if (cfg.spectral.n_nodes < 16) throw ValidationError("config: spectral.n_nodes must be >= 16");
  cfg.spectral.window = num("spectral.window", cfg.spectral.window);
  if (!(cfg.spectral.window > 0.0)) throw ValidationError("config: spectral.window must be positive");
  cfg.k_grid_min = num("spectral.k_grid_min", -1.0 / b);
  cfg.k_grid_max = num("spectral.k_grid_max", 10.0 / b);
  if (!(cfg.k_grid_max > cfg.k_grid_min)) throw ValidationError("config: spectral.k_grid_max must exceed k_grid_min");
  if (const auto* s = get("spectral.k_grid_count")) {
    cfg.k_grid_count = detail::parse_uint("spectral.k_grid_count", *s);
  }
  if (cfg.k_grid_count < 2) throw ValidationError("config: spectral.k_grid_count must be >= 2");

  cfg.solver.dr = num("solver.dr", cfg.solver.dr);
  cfg.solver.dt = num("solver.dt", cfg.solver.dt);
  cfg.solver.domain_factor = num("solver.domain_factor", cfg.solver.domain_factor);
  cfg.solver.stretch = num("solver.stretch", cfg.solver.stretch);
  cfg.solver.mc_step = num("solver.mc_step", cfg.solver.mc_step);
  if (const auto* s = get("solver.mc_paths")) cfg.solver.mc_paths = detail::parse_uint("solver.mc_paths", *s);
  if (const auto* s = get("solver.seed")) cfg.solver.seed = detail::parse_uint("solver.seed", *s);
  cfg.solver.validate();

  cfg.sweep.beta_offsets = list("sweep.beta_offsets", cfg.sweep.beta_offsets);
  cfg.sweep.t_values = list("sweep.t_values", cfg.sweep.t_values);
  cfg.sweep.chi_values = list("sweep.chi_values", cfg.sweep.chi_values);
  cfg.sweep.chi_t_values = list("sweep.chi_t_values", cfg.sweep.chi_t_values);
  cfg.sweep.band_bound = num("sweep.band_bound", cfg.sweep.band_bound);
  cfg.sweep.solver = cfg.solver;
  for (double off : cfg.sweep.beta_offsets) {
    if (std::abs(off) > cfg.spectral.window) {
      throw ValidationError("config: sweep.beta_offsets must lie within the validity window");
    }
  }

  if (const auto* s = get("output.directory")) cfg.output_directory = detail::trim(*s);
  if (const auto* s = get("output.formats")) {
    cfg.write_csv = cfg.write_json = false;
    for (const auto& f : detail::split(*s, ',')) {
      if (f == "csv") {
        cfg.write_csv = true;
      } else if (f == "json") {
        cfg.write_json = true;
      } else {
        throw ValidationError("config: unknown output format '" + f + "'");
      }
    }
  }
  return cfg;
}

/// Flattens an INI document into dotted keys.
inline std::map<std::string, std::string> read_ini(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  std::map<std::string, std::string> kv;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ValidationError("config: key '" + section + "' must live inside a [section]");
    for (const auto& [key, value] : body) kv[section + "." + key] = value.get_value<std::string>();
  }
  return kv;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open " + path.string());
  return parse_config(read_ini(in));
}

inline RunConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(read_ini(in));
}

}  // namespace polymer
