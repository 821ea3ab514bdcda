#pragma once

// The `sawtooth` command line: bands | ids | dos | spectrum | convergence |
// lifshitz. run() is the whole program, callable in-process from tests.
// Exit codes: 0 ok, 1 usage or input error, 2 validity warning under --strict.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "run_config.hpp"
#include "sawtooth/sawtooth.hpp"

namespace sawtooth::cli {

namespace detail {

struct Context {
  RunConfig config;
  Lattice lattice;
  EnergyUnit unit = EnergyUnit::dimensionless;
  std::vector<std::string> warnings;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;
};

inline std::string metadata(const Context& ctx) {
  const auto& c = ctx.config;
  const auto& l = ctx.lattice;
  std::string s = "# sawtooth " + c.command + "\n";
  s += "# kappa=" + format_double(l.kappa) + "\n";
  if (c.preset) {
    s += "# preset " + *c.preset + ": kappa pinned to " + format_double(l.kappa) +
         "; recomputed from V0=" + format_double(*l.v0_ev) + " eV, L0=" +
         format_double(*l.l0_angstrom) + " A: kappa=" + format_double(*l.physical_kappa()) + "\n";
    if (*c.preset == "hydrogen") {
      s += "# hydrogen: L0 = 1 A read as the half-period; reading 1 A as the full period gives kappa=" +
           format_double(kappa_from_physical(1.0, *l.v0_ev, 0.5 * *l.l0_angstrom)) + "\n";
    }
  } else if (l.has_physical()) {
    s += "# V0=" + format_double(*l.v0_ev) + " eV, L0=" + format_double(*l.l0_angstrom) +
         " A, m/me=" + format_double(*l.mass_ratio) + "\n";
  }
  s += "# unit=" + std::string(ctx.unit == EnergyUnit::ev ? "eV" : "dimensionless") + "\n";
  return s;
}

inline void emit(const Context& ctx, const std::string& body) {
  const std::string text = metadata(ctx) + body;
  if (ctx.config.out.empty()) {
    *ctx.out << text;
  } else {
    write_file_atomic(ctx.config.out, text);
  }
}

inline double to_dimensionless(const Context& ctx, double energy) {
  return ctx.unit == EnergyUnit::ev ? ctx.lattice.from_ev(energy) : energy;
}

inline void cmd_bands(Context& ctx) {
  const auto& c = ctx.config;
  const double emax = c.emax ? to_dimensionless(ctx, *c.emax) : 0.0;
  BandTable table;
  if (c.max_band >= 0) {
    double ceiling = 0.0;
    table = band_edges(ctx.lattice, ceiling);
    while (static_cast<int>(table.bands.size()) <= c.max_band) {
      ceiling = 2.0 * ceiling + 1.0;
      table = band_edges(ctx.lattice, ceiling);
    }
    table.bands.resize(static_cast<std::size_t>(c.max_band) + 1);
  } else {
    if (!(emax > -1.0)) throw UsageError("bands: --emax must lie above the well bottom");
    table = band_edges(ctx.lattice, emax);
  }
  const bool ev = ctx.unit == EnergyUnit::ev;
  std::string body = ev ? csv_line({"p", "e_min", "e_max", "E_min_eV", "E_max_eV"})
                        : csv_line({"p", "e_min", "e_max"});
  for (const Band& b : table.bands) {
    std::vector<std::string> row = {std::to_string(b.p), format_double(b.e_min), format_double(b.e_max)};
    if (ev) {
      row.push_back(format_double(ctx.lattice.to_ev(b.e_min)));
      row.push_back(format_double(ctx.lattice.to_ev(b.e_max)));
    }
    body += csv_line(row);
  }
  emit(ctx, body);
}

inline void cmd_table(Context& ctx) {
  const auto& c = ctx.config;
  TabulateOptions opt;
  opt.e_min = c.emin ? to_dimensionless(ctx, *c.emin) : -1.0;
  opt.e_max = c.emax ? to_dimensionless(ctx, *c.emax) : 0.0;
  if (!(opt.e_min >= -1.0) || !(opt.e_min < opt.e_max)) {
    throw UsageError(c.command + ": need -1 <= emin < emax (dimensionless)");
  }
  if (c.points < 2) throw UsageError(c.command + ": --points must be at least 2");
  if (c.band_points < 0) throw UsageError(c.command + ": --band-points must be >= 0");
  if (!(c.edge_margin >= 1e-12)) throw UsageError(c.command + ": --edge-margin must be >= 1e-12");
  opt.n_points = static_cast<std::size_t>(c.points);
  opt.band_points = static_cast<std::size_t>(c.band_points);
  opt.edge_margin = c.edge_margin;
  opt.unit = ctx.unit;
  opt.threads = c.threads;
  emit(ctx, to_csv(tabulate(ctx.lattice, opt)));
}

inline void cmd_spectrum(Context& ctx) {
  const auto& c = ctx.config;
  if (c.n_values.size() > 1) throw UsageError("spectrum: -N takes a single value");
  const int N = c.n_values.empty() ? 10 : c.n_values.front();
  if (N < 0) throw UsageError("spectrum: -N must be >= 0");
  const FiniteSpectrum s = eigenvalues(N, ctx.lattice, band_edges(ctx.lattice, 0.0));
  for (const auto& d : s.diagnostics) ctx.warnings.push_back(d);
  std::string body = "# N=" + std::to_string(N) + ", wells=" + std::to_string(s.n_wells) + "\n";
  emit(ctx, body + to_csv(s, ctx.lattice, ctx.unit));
}

inline void cmd_convergence(Context& ctx) {
  const auto& c = ctx.config;
  const std::vector<int> n_list = c.n_values.empty() ? std::vector<int>{10, 20, 40, 80} : c.n_values;
  for (int N : n_list) {
    if (N < 0) throw UsageError("convergence: N values must be >= 0");
  }
  if (c.grid_points < 1) throw UsageError("convergence: --grid-points must be positive");
  std::vector<ConvergenceRow> rows;
  try {
    rows = convergence_report(ctx.lattice, n_list, uniform_grid(static_cast<std::size_t>(c.grid_points)));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  std::string body = "# grid: " + std::to_string(c.grid_points) + " midpoints of [-1, 0]\n";
  if (rows.size() >= 2) body += "# decay_exponent=" + format_double(decay_exponent(rows)) + "\n";
  emit(ctx, body + to_csv(rows));
}

inline void cmd_lifshitz(Context& ctx) {
  const auto& c = ctx.config;
  DisorderConfig dc;
  dc.lattice = ctx.lattice;
  dc.delta = c.delta;
  dc.n_sites = c.n_sites;
  dc.samples = c.samples;
  dc.seed = c.seed;
  try {
    validate(dc);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  LifshitzOptions opt;
  opt.ids_cap = c.ids_cap;
  opt.grid_points = c.tail_points;
  opt.threads = c.threads;
  const LifshitzRun run = run_lifshitz(dc, opt);
  const LifshitzFit& f = run.fit;
  if (f.mismatch) {
    ctx.warnings.push_back("lifshitz: model mismatch, ln(-ln IDS) is not linear in ln(e - e0)");
  }
  nlohmann::ordered_json j;
  j["e0_hat"] = f.e0_hat;
  j["window"] = {f.window_lo, f.window_hi};
  j["exponent"] = f.exponent;
  j["stderr"] = f.stderr_slope;
  j["samples"] = c.samples;
  j["seed"] = c.seed;
  j["mismatch"] = f.mismatch;
  j["delta"] = c.delta;
  j["n_sites"] = c.n_sites;
  j["kappa"] = ctx.lattice.kappa;
  j["points"] = f.points;
  j["slope_lower_half"] = f.slope_lower_half;
  j["slope_upper_half"] = f.slope_upper_half;
  j["r2_lifshitz"] = f.r2_lifshitz;
  j["r2_power"] = f.r2_power;
  const std::string fit_json = j.dump(2) + "\n";
  std::string body = "# delta=" + format_double(c.delta) + ", n_sites=" + std::to_string(c.n_sites) +
                     ", samples=" + std::to_string(c.samples) + ", seed=" + std::to_string(c.seed) + "\n";
  body += to_csv(run.curve, ctx.lattice, ctx.unit);
  std::string fit_path = c.fit_out;
  if (fit_path.empty() && !c.out.empty()) fit_path = c.out + ".fit.json";
  if (fit_path.empty()) {
    body += "# fit " + j.dump() + "\n";
  } else {
    write_file_atomic(fit_path, fit_json);
  }
  emit(ctx, body);
}

// --config is applied before the other flags so that flags override it.
inline std::string find_config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return {};
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace detail

/// args excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Band structure, IDS and DOS of the 1D sawtooth (triangular) potential"};
  app.name("sawtooth");
  app.fallthrough();
  app.require_subcommand(1);

  double kappa = 0, v0 = 0, l0 = 0, mass = 0, emin = 0, emax = 0;
  std::string preset;
  std::string config_path;
  bool print_config = false;
  auto* o_kappa = app.add_option("--kappa", kappa, "dimensionless depth-width parameter");
  auto* o_v0 = app.add_option("--v0-ev", v0, "well depth V0 in eV");
  auto* o_l0 = app.add_option("--l0-angstrom", l0, "half-period L0 in Angstrom");
  auto* o_mass = app.add_option("--mass-ratio", mass, "particle mass / electron mass (default 1)");
  auto* o_preset = app.add_option("--preset", preset, "hydrogen | carbon");
  app.add_option("--unit", cfg.unit, "dimensionless | eV");
  app.add_option("--out", cfg.out, "output path (written atomically); stdout if absent");
  app.add_option("--seed", cfg.seed, "random seed (lifshitz)");
  app.add_flag("--strict", cfg.strict, "exit with code 2 on validity warnings");
  app.add_option("--threads", cfg.threads, "worker threads (0: hardware)");
  app.add_option("--config", config_path, "JSON run configuration; flags override it");
  app.add_flag("--print-config", print_config, "print the effective configuration and exit");
  app.add_option("--max-band", cfg.max_band, "bands: highest band ordinal to list");
  auto* o_emin = app.add_option("--emin", emin, "lower end of the energy range (output unit)");
  auto* o_emax = app.add_option("--emax", emax, "upper end of the energy range (output unit)");
  app.add_option("--points", cfg.points, "ids/dos: uniform points");
  app.add_option("--band-points", cfg.band_points, "ids/dos: extra Chebyshev points per band");
  app.add_option("--edge-margin", cfg.edge_margin, "ids/dos: no DOS value this close to an edge");
  auto* o_n = app.add_option("-N,--N", cfg.n_values, "spectrum: N; convergence: ascending list")
                  ->delimiter(',');
  app.add_option("--grid-points", cfg.grid_points, "convergence: energy grid size");
  app.add_option("--delta", cfg.delta, "lifshitz: disorder strength");
  app.add_option("--n-sites", cfg.n_sites, "lifshitz: wells per sample");
  app.add_option("--samples", cfg.samples, "lifshitz: number of samples");
  app.add_option("--ids-cap", cfg.ids_cap, "lifshitz: top of the tail window in IDS");
  app.add_option("--tail-points", cfg.tail_points, "lifshitz: grid points in the tail window");
  app.add_option("--fit-out", cfg.fit_out, "lifshitz: JSON fit path (default <out>.fit.json)");
  const std::vector<std::string> commands = {"bands", "ids", "dos", "spectrum", "convergence", "lifshitz"};
  for (const auto& name : commands) app.add_subcommand(name);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    const std::string path = detail::find_config_path(args);
    if (!path.empty()) cfg = parse_config(detail::read_file(path));
    // CLI11 leaves unset options alone, so config values survive.
    const std::vector<int> n_before = cfg.n_values;
    app.parse(reversed);
    if (o_n->count() == 0) cfg.n_values = n_before;
    cfg.command = app.get_subcommands().front()->get_name();
    if (o_kappa->count()) cfg.kappa = kappa;
    if (o_v0->count()) cfg.v0_ev = v0;
    if (o_l0->count()) cfg.l0_angstrom = l0;
    if (o_mass->count()) cfg.mass_ratio = mass;
    if (o_preset->count()) cfg.preset = preset;
    if (o_emin->count()) cfg.emin = emin;
    if (o_emax->count()) cfg.emax = emax;
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 1;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  if (print_config) {
    out << emit_config(cfg);
    return 0;
  }

  detail::Context ctx;
  ctx.config = cfg;
  ctx.out = &out;
  ctx.err = &err;
  try {
    ctx.unit = energy_unit(cfg);
    ctx.lattice = lattice_of(cfg);
    if (!ctx.lattice.formula_valid()) {
      ctx.warnings.push_back("kappa = " + format_double(ctx.lattice.kappa) + " is below kappa0 ≈ " +
                             format_double(std::round(kappa0() * 1000.0) / 1000.0) +
                             "; IDS/DOS formulas not validated");
    }
    // Below kappa0 the warning is known before any work; --strict stops here.
    if (cfg.strict && !ctx.warnings.empty()) {
      for (const auto& w : ctx.warnings) err << "warning: " << w << "\n";
      return 2;
    }
    if (cfg.command == "bands") {
      detail::cmd_bands(ctx);
    } else if (cfg.command == "ids" || cfg.command == "dos") {
      detail::cmd_table(ctx);
    } else if (cfg.command == "spectrum") {
      detail::cmd_spectrum(ctx);
    } else if (cfg.command == "convergence") {
      detail::cmd_convergence(ctx);
    } else {
      detail::cmd_lifshitz(ctx);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  for (const auto& w : ctx.warnings) err << "warning: " << w << "\n";
  return cfg.strict && !ctx.warnings.empty() ? 2 : 0;
}

}  // namespace sawtooth::cli
