#pragma once

// Finite chain of n = 2N+1 wells between two cusp tops, with V = 0 outside.
// For e < 0 the exterior solutions decay like exp(-q|s|), q = kappa^{3/2} sqrt(-e)
// (s in units of L0), so an eigenvalue is a zero of the pairing
//   (q, 1) . M^n (1, q)        in (psi, dpsi/ds) coordinates.
// In the half-cell coordinates (psi, dpsi/dt) = diag(1, 1/kappa)(psi, psi_s)
// this is kappa (qt, 1) . M_t^n (1, qt) with qt = sqrt(kappa) sqrt(-e), and M_t^n
// is reduced with Chebyshev polynomials of the second kind:
//   M^n = U_{n-1}(x) M - U_{n-2}(x) I,  x = Delta/2.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sawtooth/bands.hpp"
#include "sawtooth/csv.hpp"
#include "sawtooth/lattice.hpp"
#include "sawtooth/roots.hpp"
#include "sawtooth/spectral_density.hpp"

namespace sawtooth {

/// Left/right boundary vectors (1, -q) and (1, +q), q = kappa^{3/2} sqrt(-e),
/// in (psi, dpsi/ds) coordinates.
inline std::pair<Vec2, Vec2> boundary_vectors(double e, double kappa) {
  if (!(e < 0.0) || !(e >= -1.0)) {
    throw std::domain_error("boundary_vectors: need -1 <= e < 0, got " + format_double(e));
  }
  const double q = std::pow(kappa, 1.5) * std::sqrt(-e);
  return {{1.0, -q}, {1.0, q}};
}

/// decaying: start (1, q), pair with (q, 1); both exterior solutions decay.
/// boundary_vectors: start (1, -q), require alignment with (1, q), i.e. pair
/// with (-q, 1); both exterior solutions grow.
enum class Pairing { decaying, boundary_vectors };

/// Secular value = value * exp(log_scale); log_scale is nonzero only in gaps.
struct SecularValue {
  double value = 0.0;
  double log_scale = 0.0;
};

namespace detail {

// U_{n-1}(x) and U_{n-2}(x) for x = Delta/2 of the half-cell [a, b; c, d],
// both multiplied by exp(-log_scale).
struct ChebyshevPair {
  double u1 = 0.0;  // U_{n-1}
  double u2 = 0.0;  // U_{n-2}
  double log_scale = 0.0;
};

inline ChebyshevPair chebyshev_pair(const Mat2& p, int n) {
  const double bc = p.a12 * p.a21;
  const double ad = p.a11 * p.a22;
  const double dn = n;
  ChebyshevPair r;
  if (bc > 0.0 || ad < 0.0) {
    // Gap: x = +-cosh(mu) with |x| - 1 = 2bc or -2ad.
    const bool upper = bc > 0.0;
    const double y = upper ? 2.0 * bc : -2.0 * ad;
    const double mu = std::log1p(y + std::sqrt(y * (y + 2.0)));
    const double s1 = (upper || (n - 1) % 2 == 0) ? 1.0 : -1.0;  // sign^(n-1)
    const double s2 = (upper || (n - 2) % 2 == 0) ? 1.0 : -1.0;
    if (mu == 0.0) {
      r.u1 = s1 * dn;
      r.u2 = s2 * (dn - 1.0);
      return r;
    }
    const double den = std::expm1(-2.0 * mu);
    r.u1 = s1 * std::expm1(-2.0 * dn * mu) / den;
    r.u2 = s2 * std::exp(-mu) * std::expm1(-2.0 * (dn - 1.0) * mu) / den;
    r.log_scale = (dn - 1.0) * mu;
    return r;
  }
  // Band: x = cos(theta). Near x = -1 work with eps = pi - theta, using
  // U_k(cos theta) = (-1)^k sin((k+1) eps) / sin(eps).
  const double sb = std::sqrt(-bc);
  const double sa = std::sqrt(ad);
  const bool lower_half = ad >= -bc;  // x >= 0
  const double angle = lower_half ? 2.0 * std::atan2(sb, sa) : 2.0 * std::atan2(sa, sb);
  const double s = std::sin(angle);
  const double k1 = (!lower_half && (n - 1) % 2 != 0) ? -1.0 : 1.0;
  const double k2 = (!lower_half && (n - 2) % 2 != 0) ? -1.0 : 1.0;
  if (s == 0.0) {
    r.u1 = k1 * dn;
    r.u2 = k2 * (dn - 1.0);
  } else {
    r.u1 = k1 * std::sin(dn * angle) / s;
    r.u2 = k2 * std::sin((dn - 1.0) * angle) / s;
  }
  return r;
}

}  // namespace detail

/// Pairing value for the chain of 2N+1 wells at energy e in [-1, 0].
inline SecularValue secular_value(double e, int N, const Lattice& lattice,
                                  Pairing pairing = Pairing::decaying) {
  if (N < 0) throw std::invalid_argument("secular_value: N < 0");
  if (!(e <= 0.0) || !(e > -1.0)) {
    throw std::domain_error("secular_value: need -1 < e <= 0, got " + format_double(e));
  }
  const int n = 2 * N + 1;
  const Mat2 p = rising_propagator(e, lattice.kappa);
  const double x = p.a11 * p.a22 + p.a12 * p.a21;
  const Mat2 m{x, 2.0 * p.a11 * p.a12, 2.0 * p.a21 * p.a22, x};  // P J P^{-1} J
  const double qt = std::sqrt(lattice.kappa) * std::sqrt(-e);
  const double sgn = pairing == Pairing::decaying ? 1.0 : -1.0;
  const Vec2 u{1.0, sgn * qt};
  const Vec2 w{sgn * qt, 1.0};
  const double g = dot(w, m * u);
  const double h = dot(w, u);
  const auto cp = detail::chebyshev_pair(p, n);
  return {cp.u1 * g - cp.u2 * h, cp.log_scale};
}

struct FiniteSpectrum {
  int N = 0;
  int n_wells = 1;
  std::vector<double> eigenvalues;  // non-decreasing (repeats only in unresolved bands), dimensionless
  std::vector<int> band_of;         // band ordinal of each eigenvalue
  std::vector<int> per_band_counts;
  std::vector<bool> band_complete;  // band lies entirely below e = 0
  std::vector<bool> band_resolved;  // false: levels not separable in double
  std::vector<std::string> diagnostics;
};

namespace detail {

// Energy in band b where the Bloch phase equals theta (phase is monotone in
// each band: increasing for even p, decreasing for odd p).
inline double phase_quantile(const Band& b, double theta, const Lattice& lattice) {
  const bool rising = b.p % 2 == 0;
  const double target = rising ? theta : std::numbers::pi - theta;
  if (target <= 0.0) return rising ? b.e_min : b.e_max;
  if (target >= std::numbers::pi) return rising ? b.e_max : b.e_min;
  auto f = [&](double e) { return band_phase(e, b, lattice) - theta; };
  return solve_bracketed(f, b.e_min, b.e_max, f(b.e_min), f(b.e_max), 1e-15);
}

}  // namespace detail

/// Eigenvalues below 0 of the chain with 2N+1 wells. Roots are bracketed on
/// a grid at 8(2N+2) quantiles of the Bloch phase in each band and refined
/// with toms748. Bands below 0 are expected to hold 2N+2 levels; other
/// counts are recorded in `diagnostics`.
inline FiniteSpectrum eigenvalues(int N, const Lattice& lattice, const BandTable& table,
                                  Pairing pairing = Pairing::decaying) {
  if (N < 0) throw std::invalid_argument("eigenvalues: N < 0");
  if (table.coverage() < 0.0) throw std::invalid_argument("eigenvalues: table must cover e = 0");
  FiniteSpectrum out;
  out.N = N;
  out.n_wells = 2 * N + 1;
  const int nodes = 8 * (2 * N + 2);
  auto value_of = [&](double e) { return secular_value(e, N, lattice, pairing).value; };
  for (const Band& b : table.bands) {
    if (b.e_min >= 0.0) break;
    const bool complete = b.e_max < 0.0;
    if (b.width() < 2.0 * default_edge_guard) {
      // Narrower than the phase can be resolved in double: the levels cannot
      // be separated, so one per well is placed at the band midpoint.
      out.eigenvalues.insert(out.eigenvalues.end(), static_cast<std::size_t>(out.n_wells), b.midpoint());
      out.band_of.insert(out.band_of.end(), static_cast<std::size_t>(out.n_wells), b.p);
      out.per_band_counts.push_back(out.n_wells);
      out.band_complete.push_back(complete);
      out.band_resolved.push_back(false);
      out.diagnostics.push_back("band " + std::to_string(b.p) + ": width " + format_double(b.width()) +
                                " below double resolution, " + std::to_string(out.n_wells) +
                                " levels placed at its midpoint");
      continue;
    }
    std::vector<double> grid;
    for (int j = 0; j <= nodes; ++j) {
      const double e = detail::phase_quantile(b, std::numbers::pi * j / nodes, lattice);
      if (e < 0.0) grid.push_back(e);
    }
    if (!complete) grid.push_back(0.0);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    int count = 0;
    for (std::size_t j = 1; j < grid.size(); ++j) {
      const double f0 = value_of(grid[j - 1]);
      const double f1 = value_of(grid[j]);
      if (std::signbit(f0) == std::signbit(f1)) continue;
      if (f1 == 0.0 && j + 1 < grid.size()) continue;  // counted in the next interval
      const double root = solve_bracketed(value_of, grid[j - 1], grid[j], f0, f1, 1e-13);
      if (root >= 0.0) continue;
      out.eigenvalues.push_back(root);
      out.band_of.push_back(b.p);
      ++count;
    }
    out.per_band_counts.push_back(count);
    out.band_complete.push_back(complete);
    out.band_resolved.push_back(true);
    if (complete && count != 2 * N + 2) {
      out.diagnostics.push_back("band " + std::to_string(b.p) + ": " + std::to_string(count) +
                                " levels, expected 2N+2 = " + std::to_string(2 * N + 2));
    }
  }
  return out;
}

/// Sign changes of the secular value on `points` uniform samples of every
/// gap below 0 (the open gap interiors).
inline std::vector<int> gap_sign_changes(int N, const Lattice& lattice, const BandTable& table,
                                         int points, Pairing pairing = Pairing::decaying) {
  std::vector<int> out;
  double lo = -1.0;
  for (std::size_t k = 0; k <= table.bands.size(); ++k) {
    const double hi = k < table.bands.size() ? std::min(table.bands[k].e_min, 0.0) : 0.0;
    if (lo >= 0.0) break;
    int changes = 0;
    bool have_prev = false, prev = false;
    for (int j = 1; j < points; ++j) {
      const double e = lo + (hi - lo) * double(j) / double(points);
      const bool s = std::signbit(secular_value(e, N, lattice, pairing).value);
      if (have_prev && s != prev) ++changes;
      prev = s;
      have_prev = true;
    }
    out.push_back(changes);
    if (k < table.bands.size()) lo = table.bands[k].e_max;
  }
  return out;
}

/// Right-continuous count of levels <= e divided by 2(2N+1).
inline double counting_function(double e, const FiniteSpectrum& s) {
  const auto below = std::upper_bound(s.eigenvalues.begin(), s.eigenvalues.end(), e) -
                     s.eigenvalues.begin();
  return static_cast<double>(below) / (2.0 * s.n_wells);
}

struct ConvergenceRow {
  int N = 0;
  double sup_error = 0.0;
  double mean_error = 0.0;
  double worst_e = 0.0;  // where the sup is attained
};

/// Default comparison grid: n midpoints of a uniform partition of (-1, 0).
inline std::vector<double> uniform_grid(std::size_t n, double lo = -1.0, double hi = 0.0) {
  std::vector<double> g(n);
  for (std::size_t j = 0; j < n; ++j) g[j] = lo + (hi - lo) * (double(j) + 0.5) / double(n);
  return g;
}

inline std::vector<ConvergenceRow> convergence_report(const Lattice& lattice,
                                                      const std::vector<int>& n_list,
                                                      const std::vector<double>& grid) {
  if (n_list.empty()) throw std::invalid_argument("convergence_report: empty N list");
  if (!std::is_sorted(n_list.begin(), n_list.end()) ||
      std::adjacent_find(n_list.begin(), n_list.end()) != n_list.end()) {
    throw std::invalid_argument("convergence_report: N list must be strictly ascending");
  }
  const BandTable table = band_edges(lattice, 0.0);
  std::vector<double> exact(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) exact[i] = ids(grid[i], lattice, table);
  std::vector<ConvergenceRow> rows;
  for (int N : n_list) {
    const FiniteSpectrum s = eigenvalues(N, lattice, table);
    ConvergenceRow r;
    r.N = N;
    double sum = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double err = std::abs(counting_function(grid[i], s) - exact[i]);
      sum += err;
      if (err > r.sup_error) {
        r.sup_error = err;
        r.worst_e = grid[i];
      }
    }
    r.mean_error = grid.empty() ? 0.0 : sum / double(grid.size());
    rows.push_back(r);
  }
  return rows;
}

/// Least-squares exponent s in sup_error ~ C N^{-s}.
inline double decay_exponent(const std::vector<ConvergenceRow>& rows) {
  if (rows.size() < 2) throw std::invalid_argument("decay_exponent: need two rows");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& r : rows) {
    const double x = std::log(double(r.N));
    const double y = std::log(r.sup_error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = double(rows.size());
  return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline std::string to_csv(const FiniteSpectrum& s, const Lattice& lattice, EnergyUnit unit) {
  std::string out = csv_line({"index", "e", "E_unit", "band"});
  for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
    const double e = s.eigenvalues[i];
    const double energy = unit == EnergyUnit::ev ? lattice.to_ev(e) : e;
    out += csv_line({std::to_string(i), format_double(e), format_double(energy),
                     std::to_string(s.band_of[i])});
  }
  return out;
}

inline std::string to_csv(const std::vector<ConvergenceRow>& rows) {
  std::string out = csv_line({"N", "sup_error", "mean_error"});
  for (const auto& r : rows) {
    out += csv_line({std::to_string(r.N), format_double(r.sup_error), format_double(r.mean_error)});
  }
  return out;
}

}  // namespace sawtooth
