#pragma once

// Flags of one CLI run, with a JSON form for --config / --print-config.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "sawtooth/lattice.hpp"
#include "sawtooth/spectral_density.hpp"

namespace sawtooth::cli {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  std::string command;

  // Lattice source: exactly one of kappa, the physical triple, or a preset.
  std::optional<double> kappa;
  std::optional<double> v0_ev;
  std::optional<double> l0_angstrom;
  std::optional<double> mass_ratio;
  std::optional<std::string> preset;

  std::string unit = "dimensionless";
  std::string out;
  std::uint64_t seed = 1;
  bool strict = false;
  unsigned threads = 0;

  // bands
  int max_band = -1;  // -1: all bands starting below emax

  // ids / dos; the range is in the output unit, default [-1, 0] dimensionless
  std::optional<double> emin;
  std::optional<double> emax;
  int points = 1000;
  int band_points = 33;
  double edge_margin = 1e-12;

  // spectrum (one value) / convergence (ascending list)
  std::vector<int> n_values;
  int grid_points = 1000;

  // lifshitz
  double delta = 0.3;
  int n_sites = 401;
  int samples = 100;
  double ids_cap = 0.05;
  int tail_points = 200;
  std::string fit_out;

  bool operator==(const RunConfig&) const = default;
};

namespace detail {

template <class T>
void put_optional(nlohmann::json& j, const char* key, const std::optional<T>& v) {
  j[key] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

template <class T>
void get_optional(const nlohmann::json& j, const char* key, std::optional<T>& v) {
  if (!j.contains(key) || j.at(key).is_null()) {
    v.reset();
  } else {
    v = j.at(key).get<T>();
  }
}

template <class T>
void get_or_keep(const nlohmann::json& j, const char* key, T& v) {
  if (j.contains(key)) v = j.at(key).get<T>();
}

}  // namespace detail

inline void to_json(nlohmann::json& j, const RunConfig& c) {
  j = nlohmann::json::object();
  j["command"] = c.command;
  detail::put_optional(j, "kappa", c.kappa);
  detail::put_optional(j, "v0_ev", c.v0_ev);
  detail::put_optional(j, "l0_angstrom", c.l0_angstrom);
  detail::put_optional(j, "mass_ratio", c.mass_ratio);
  detail::put_optional(j, "preset", c.preset);
  j["unit"] = c.unit;
  j["out"] = c.out;
  j["seed"] = c.seed;
  j["strict"] = c.strict;
  j["threads"] = c.threads;
  j["max_band"] = c.max_band;
  detail::put_optional(j, "emin", c.emin);
  detail::put_optional(j, "emax", c.emax);
  j["points"] = c.points;
  j["band_points"] = c.band_points;
  j["edge_margin"] = c.edge_margin;
  j["N"] = c.n_values;
  j["grid_points"] = c.grid_points;
  j["delta"] = c.delta;
  j["n_sites"] = c.n_sites;
  j["samples"] = c.samples;
  j["ids_cap"] = c.ids_cap;
  j["tail_points"] = c.tail_points;
  j["fit_out"] = c.fit_out;
}

// Missing keys keep their defaults; unknown keys are rejected so that typos
// in config files do not pass silently.
inline void from_json(const nlohmann::json& j, RunConfig& c) {
  static const std::vector<std::string> known = {
      "command", "kappa",   "v0_ev",       "l0_angstrom", "mass_ratio", "preset",  "unit",
      "out",     "seed",    "strict",      "threads",     "max_band",   "emin",    "emax",
      "points",  "band_points", "edge_margin", "N",        "grid_points", "delta", "n_sites",
      "samples", "ids_cap", "tail_points", "fit_out"};
  if (!j.is_object()) throw UsageError("config: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw UsageError("config: unknown key '" + key + "'");
    }
  }
  detail::get_or_keep(j, "command", c.command);
  detail::get_optional(j, "kappa", c.kappa);
  detail::get_optional(j, "v0_ev", c.v0_ev);
  detail::get_optional(j, "l0_angstrom", c.l0_angstrom);
  detail::get_optional(j, "mass_ratio", c.mass_ratio);
  detail::get_optional(j, "preset", c.preset);
  detail::get_or_keep(j, "unit", c.unit);
  detail::get_or_keep(j, "out", c.out);
  detail::get_or_keep(j, "seed", c.seed);
  detail::get_or_keep(j, "strict", c.strict);
  detail::get_or_keep(j, "threads", c.threads);
  detail::get_or_keep(j, "max_band", c.max_band);
  detail::get_optional(j, "emin", c.emin);
  detail::get_optional(j, "emax", c.emax);
  detail::get_or_keep(j, "points", c.points);
  detail::get_or_keep(j, "band_points", c.band_points);
  detail::get_or_keep(j, "edge_margin", c.edge_margin);
  detail::get_or_keep(j, "N", c.n_values);
  detail::get_or_keep(j, "grid_points", c.grid_points);
  detail::get_or_keep(j, "delta", c.delta);
  detail::get_or_keep(j, "n_sites", c.n_sites);
  detail::get_or_keep(j, "samples", c.samples);
  detail::get_or_keep(j, "ids_cap", c.ids_cap);
  detail::get_or_keep(j, "tail_points", c.tail_points);
  detail::get_or_keep(j, "fit_out", c.fit_out);
}

inline RunConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  try {
    return j.get<RunConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
}

inline std::string emit_config(const RunConfig& c) { return nlohmann::json(c).dump(2) + "\n"; }

inline EnergyUnit energy_unit(const RunConfig& c) {
  if (c.unit == "dimensionless") return EnergyUnit::dimensionless;
  if (c.unit == "eV" || c.unit == "ev") return EnergyUnit::ev;
  throw UsageError("unit must be 'dimensionless' or 'eV', got '" + c.unit + "'");
}

/// Checks the source and unit invariants and builds the lattice.
inline Lattice lattice_of(const RunConfig& c) {
  const bool physical = c.v0_ev || c.l0_angstrom || c.mass_ratio;
  const int sources = int(c.kappa.has_value()) + int(physical) + int(c.preset.has_value());
  if (sources != 1) {
    throw UsageError(
        "exactly one lattice source is required: --kappa, --v0-ev/--l0-angstrom[/--mass-ratio], or --preset");
  }
  Lattice lattice;
  try {
    if (c.kappa) {
      lattice = Lattice::from_kappa(*c.kappa);
    } else if (physical) {
      if (!c.v0_ev || !c.l0_angstrom) throw UsageError("physical source needs --v0-ev and --l0-angstrom");
      lattice = Lattice::from_physical(c.mass_ratio.value_or(1.0), *c.v0_ev, *c.l0_angstrom);
    } else if (*c.preset == "hydrogen") {
      lattice = Lattice::preset(Preset::hydrogen);
    } else if (*c.preset == "carbon") {
      lattice = Lattice::preset(Preset::carbon);
    } else {
      throw UsageError("preset must be 'hydrogen' or 'carbon', got '" + *c.preset + "'");
    }
  } catch (const UsageError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (energy_unit(c) == EnergyUnit::ev && !lattice.has_physical()) {
    throw UsageError("--unit eV needs a physical lattice source (V0, L0) or a preset");
  }
  return lattice;
}

}  // namespace sawtooth::cli
