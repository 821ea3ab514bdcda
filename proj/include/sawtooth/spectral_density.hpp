#pragma once

// Bloch phase, integrated density of states and density of states.
//
// With the rising half-cell [a, b; c, d] (ad - bc = 1) the Bloch phase is
//   Phi = arccos(Delta/2) = 2 atan2(sqrt(-bc), sqrt(ad)),
// and the IDS in band p is p/2 + Phi/(2 pi) for even p and
// p/2 + 1/2 - Phi/(2 pi) for odd p, constant (p+1)/2 in the gap above band p.
// IDS counts states per well divided by two, so every band carries 1/2.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sawtooth/bands.hpp"
#include "sawtooth/csv.hpp"
#include "sawtooth/detail/parallel.hpp"
#include "sawtooth/lattice.hpp"

namespace sawtooth {

inline constexpr double default_edge_guard = 1e-12;

/// WKB band ordinal floor((4/(3 pi)) kappa^{3/2} (1+e)^{3/2}).
inline int band_index_formula(double e, double kappa) {
  if (!(e >= -1.0)) throw std::domain_error("band_index_formula: e < -1");
  return static_cast<int>(
      std::floor(4.0 / (3.0 * std::numbers::pi) * std::pow(kappa * (1.0 + e), 1.5)));
}

/// Bloch phase in [0, pi]; e must lie in a band (bc <= 0 <= ad up to 1e-12
/// relative to |ad| + |bc|, which is huge in deep thin bands).
inline double phi(double e, const Lattice& lattice) {
  const Mat2 p = rising_propagator(e, lattice.kappa);
  const double mbc = -p.a12 * p.a21;
  const double ad = p.a11 * p.a22;
  const double tol = 1e-12 * std::max(1.0, std::abs(ad) + std::abs(mbc));
  if (mbc < -tol || ad < -tol) {
    throw std::domain_error("phi: e = " + format_double(e) + " is not in a band");
  }
  return 2.0 * std::atan2(std::sqrt(std::max(mbc, 0.0)), std::sqrt(std::max(ad, 0.0)));
}

/// dPhi/de strictly inside a band:
/// Phi' = -(a'd + ad' + b'c + bc') / (2 sqrt(-abcd)).
inline double phi_prime(double e, const Lattice& lattice) {
  const Mat2 p = rising_propagator(e, lattice.kappa);
  const Mat2 dp = rising_propagator_derivative(e, lattice.kappa);
  const double r = -p.a11 * p.a12 * p.a21 * p.a22;
  if (!(r > 0.0)) {
    throw std::domain_error("phi_prime: e = " + format_double(e) +
                            " is not strictly inside a band");
  }
  const double half_ddelta = dp.a11 * p.a22 + p.a11 * dp.a22 + dp.a12 * p.a21 + p.a12 * dp.a21;
  return -half_ddelta / (2.0 * std::sqrt(r));
}

inline double ids_in_band(int p, double phase) {
  const double base = 0.5 * p;
  return p % 2 == 0 ? base + phase / (2.0 * std::numbers::pi)
                    : base + 0.5 - phase / (2.0 * std::numbers::pi);
}

namespace detail {

// Phase at e in band b. Within the edge guard the entries may round to the
// wrong side of the band (bands can be thinner than one ulp of e); the phase
// is then the value at the nearer edge, ties going to the upper one.
inline double band_phase(double e, const Band& b, const Lattice& lattice) {
  const double to_lower = e - b.e_min;
  const double to_upper = b.e_max - e;
  if (std::min(to_lower, to_upper) >= default_edge_guard) return phi(e, lattice);
  try {
    return phi(e, lattice);
  } catch (const std::domain_error&) {
    const bool upper = to_upper <= to_lower;
    return (b.p % 2 == 0) == upper ? std::numbers::pi : 0.0;
  }
}

}  // namespace detail

/// Dimensionless IDS at e; the band table must cover e.
inline double ids(double e, const Lattice& lattice, const BandTable& table) {
  if (e <= -1.0) return 0.0;
  const BandLocation loc = band_index(e, table);
  if (loc.in_gap) return 0.5 * (loc.p + 1);
  return ids_in_band(loc.p, detail::band_phase(e, table.bands[static_cast<std::size_t>(loc.p)], lattice));
}

/// Dimensionless DOS d(IDS)/de. Zero in gaps; rejected within `edge_guard`
/// of a band edge, where it diverges like |e - edge|^{-1/2}.
inline double dos(double e, const Lattice& lattice, const BandTable& table,
                  double edge_guard = default_edge_guard) {
  if (e <= -1.0) return 0.0;
  const BandLocation loc = band_index(e, table);
  if (loc.in_gap) return 0.0;
  const Band& b = table.bands[static_cast<std::size_t>(loc.p)];
  if (e - b.e_min < edge_guard || b.e_max - e < edge_guard) {
    throw std::domain_error("dos: e = " + format_double(e) + " within edge guard of band " +
                            std::to_string(loc.p));
  }
  const double sign = loc.p % 2 == 0 ? 1.0 : -1.0;
  return sign * phi_prime(e, lattice) / (2.0 * std::numbers::pi);
}

/// IDS and DOS with energies in eV (DOS in states per eV).
inline double ids_ev(double energy, const Lattice& lattice, const BandTable& table) {
  return ids(lattice.from_ev(energy), lattice, table);
}
inline double dos_ev(double energy, const Lattice& lattice, const BandTable& table) {
  return dos(lattice.from_ev(energy), lattice, table) / *lattice.v0_ev;
}

enum class EdgeSide { lower, upper };

struct EdgeCoefficient {
  int p = 0;
  EdgeSide side = EdgeSide::lower;
  double k_value = 0.0;  // lim |ids(e) - ids(edge)| / sqrt|e - edge|
  double r_value = 0.0;  // lim dos(e) sqrt|e - edge|
  double k_halved = 0.0;  // same extrapolations from the halved window
  double r_halved = 0.0;
  double distance = 0.0;  // outermost evaluation distance d
  bool converged = false;  // halved-window values agree within 5%
};

namespace detail {

// Two-level Richardson for f(d) = f0 + c1 d + c2 d^2 + ... from d, d/2, d/4.
inline double richardson3(double f1, double f2, double f4) {
  const double r12 = 2.0 * f2 - f1;
  const double r24 = 2.0 * f4 - f2;
  return (4.0 * r24 - r12) / 3.0;
}

}  // namespace detail

inline EdgeCoefficient edge_coefficient(int p, EdgeSide side, const Lattice& lattice,
                                        const BandTable& table, double d = 1e-4) {
  if (p < 0 || static_cast<std::size_t>(p) >= table.bands.size()) {
    throw std::out_of_range("edge_coefficient: no band " + std::to_string(p));
  }
  const Band& b = table.bands[static_cast<std::size_t>(p)];
  d = std::min(d, b.width() / 8.0);
  if (!(d > 1e-11)) throw std::domain_error("edge_coefficient: band too thin");
  const double edge = side == EdgeSide::lower ? b.e_min : b.e_max;
  const double dir = side == EdgeSide::lower ? 1.0 : -1.0;
  const double ids_edge = ids_in_band(p, side == EdgeSide::lower ? phi(b.e_min, lattice)
                                                                  : phi(b.e_max, lattice));
  double fk[4], fr[4];
  for (int j = 0; j < 4; ++j) {
    const double delta = d / double(1 << j);
    const double e = edge + dir * delta;
    fk[j] = std::abs(ids(e, lattice, table) - ids_edge) / std::sqrt(delta);
    fr[j] = dos(e, lattice, table) * std::sqrt(delta);
  }
  EdgeCoefficient c;
  c.p = p;
  c.side = side;
  c.distance = d;
  c.k_value = detail::richardson3(fk[0], fk[1], fk[2]);
  c.r_value = detail::richardson3(fr[0], fr[1], fr[2]);
  c.k_halved = detail::richardson3(fk[1], fk[2], fk[3]);
  c.r_halved = detail::richardson3(fr[1], fr[2], fr[3]);
  c.converged = std::isfinite(c.k_value) && std::isfinite(c.r_value) &&
                std::abs(c.k_halved - c.k_value) <= 0.05 * std::abs(c.k_value) &&
                std::abs(c.r_halved - c.r_value) <= 0.05 * std::abs(c.r_value);
  return c;
}

/// Large-kappa approximation of tan^2(Phi/2):
///   (tau0 - 1/tau1 - 2 cos zeta) / (tau1 - 1/tau0 + 2 cos zeta),
/// tau0 = Ai/Bi(-kappa e), tau1 = Ai'/Bi'(-kappa e),
/// zeta = (2/3) (kappa (1+e))^{3/2}. Diagnostic only.
inline double phi_asymptotic(double e, const Lattice& lattice, const BandTable& table) {
  if (band_index(e, table).in_gap) {
    throw std::domain_error("phi_asymptotic: e = " + format_double(e) + " is in a gap");
  }
  const double kappa = lattice.kappa;
  const ScaledAiryQuad q = airy_eval_scaled(-kappa * e);
  const double shrink = std::exp(-2.0 * q.log_scale);
  const double tau0 = q.ai_s / q.bi_s * shrink;
  const double tau1 = q.aip_s / q.bip_s * shrink;
  const double zeta = 2.0 / 3.0 * std::pow(kappa * (1.0 + e), 1.5);
  constexpr double tiny = 1e-14;
  if (std::abs(q.bi_s) < tiny || std::abs(q.bip_s) < tiny || std::abs(tau0) < tiny ||
      std::abs(tau1) < tiny) {
    throw std::domain_error("phi_asymptotic: vanishing Airy ratio at e = " + format_double(e));
  }
  const double num = tau0 - 1.0 / tau1 - 2.0 * std::cos(zeta);
  const double den = tau1 - 1.0 / tau0 + 2.0 * std::cos(zeta);
  if (std::abs(den) < tiny) throw std::domain_error("phi_asymptotic: vanishing denominator");
  return num / den;
}

enum class EnergyUnit { dimensionless, ev };

enum class RowFlag { band, gap, edge_guard };

inline const char* to_string(RowFlag f) {
  switch (f) {
    case RowFlag::band: return "band";
    case RowFlag::gap: return "gap";
    default: return "edge-guard";
  }
}

struct SpectralRow {
  double energy = 0.0;  // in the table's unit
  double e = 0.0;
  BandLocation location;
  double phi = 0.0;
  double ids = 0.0;
  std::optional<double> dos;  // empty on edge-guard rows
  RowFlag flag = RowFlag::gap;
};

struct SpectralTable {
  double kappa = 0.0;
  EnergyUnit unit = EnergyUnit::dimensionless;
  std::vector<SpectralRow> rows;
};

struct TabulateOptions {
  double e_min = -1.0;
  double e_max = 0.0;
  std::size_t n_points = 1000;  // uniform points across the range
  std::size_t band_points = 33;  // Chebyshev-Lobatto points per band
  double edge_margin = 1e-12;
  EnergyUnit unit = EnergyUnit::dimensionless;
  unsigned threads = 0;
};

/// Evaluates one row; `table` must cover e.
inline SpectralRow spectral_row(double e, const Lattice& lattice, const BandTable& table,
                                double edge_margin, EnergyUnit unit) {
  SpectralRow row;
  row.e = e;
  row.energy = unit == EnergyUnit::ev ? lattice.to_ev(e) : e;
  row.location = e <= -1.0 ? BandLocation{-1, true} : band_index(e, table);
  const double scale = unit == EnergyUnit::ev ? 1.0 / *lattice.v0_ev : 1.0;
  if (row.location.in_gap) {
    const int p = row.location.p;
    row.phi = (p >= 0 && p % 2 == 0) ? std::numbers::pi : 0.0;
    row.ids = 0.5 * (p + 1);
    row.dos = 0.0;
    row.flag = RowFlag::gap;
    return row;
  }
  const Band& b = table.bands[static_cast<std::size_t>(row.location.p)];
  row.phi = detail::band_phase(e, b, lattice);
  row.ids = ids_in_band(b.p, row.phi);
  if (e - b.e_min < edge_margin || b.e_max - e < edge_margin) {
    row.flag = RowFlag::edge_guard;
  } else {
    row.flag = RowFlag::band;
    row.dos = dos(e, lattice, table, edge_margin) * scale;
  }
  return row;
}

inline SpectralTable tabulate(const Lattice& lattice, const TabulateOptions& opt) {
  if (opt.n_points < 2) throw std::invalid_argument("tabulate: need at least 2 points");
  if (!(opt.e_min < opt.e_max)) throw std::invalid_argument("tabulate: empty energy range");
  if (!(opt.edge_margin >= 1e-12)) throw std::invalid_argument("tabulate: edge_margin < 1e-12");
  if (opt.unit == EnergyUnit::ev && !lattice.has_physical()) {
    throw std::invalid_argument("tabulate: eV output needs physical lattice fields");
  }
  const BandTable table = band_edges(lattice, std::max(opt.e_max, -1.0 + 1e-9));
  std::vector<double> grid;
  for (std::size_t j = 0; j < opt.n_points; ++j) {
    grid.push_back(opt.e_min + (opt.e_max - opt.e_min) * double(j) / double(opt.n_points - 1));
  }
  if (opt.band_points >= 2) {
    for (const Band& b : table.bands) {
      for (std::size_t j = 0; j < opt.band_points; ++j) {
        const double c = std::cos(std::numbers::pi * double(j) / double(opt.band_points - 1));
        const double e = j == 0 ? b.e_min
                         : j + 1 == opt.band_points ? b.e_max
                                                    : b.midpoint() - 0.5 * b.width() * c;
        if (e >= opt.e_min && e <= opt.e_max) grid.push_back(e);
      }
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  SpectralTable out;
  out.kappa = lattice.kappa;
  out.unit = opt.unit;
  out.rows.resize(grid.size());
  detail::parallel_for(
      grid.size(),
      [&](std::size_t i) {
        out.rows[i] = spectral_row(grid[i], lattice, table, opt.edge_margin, opt.unit);
      },
      opt.threads);
  return out;
}

inline std::string to_csv(const SpectralTable& t) {
  std::string out = csv_line({"E", "e", "p", "phi", "ids", "dos", "flag"});
  for (const auto& r : t.rows) {
    out += csv_line({format_double(r.energy), format_double(r.e), std::to_string(r.location.p),
                     format_double(r.phi), format_double(r.ids),
                     r.dos ? format_double(*r.dos) : std::string(), to_string(r.flag)});
  }
  return out;
}

}  // namespace sawtooth
