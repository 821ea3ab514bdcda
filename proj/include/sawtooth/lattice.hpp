#pragma once

// Sawtooth lattice: v(s) = |s| - 1 on [-1, 1], extended 2-periodically, in
// units where e = E/V0 and s = x/L0. On the rising half-cell the Schrodinger
// equation becomes the Airy equation in t = kappa (s - 1 - e), so one
// half-period is an exact Airy transfer matrix from t0 = -kappa(1+e) to
// t1 = -kappa e. States are (psi, dpsi/dt) = (psi, (L0/kappa) psi').

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

#include "sawtooth/airy.hpp"
#include "sawtooth/mat2.hpp"

namespace sawtooth {

/// hbar^2 / (2 m_e) in eV·Å², from the CODATA 2018 exact/recommended values.
inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double electron_mass = 9.1093837015e-31;  // kg
inline constexpr double electron_volt = 1.602176634e-19;   // J
inline constexpr double hbar2_over_2me_ev_a2 =
    hbar * hbar / (2.0 * electron_mass) / electron_volt * 1e20;

inline double kappa_from_physical(double mass_ratio, double v0_ev, double l0_angstrom) {
  if (!(mass_ratio > 0) || !(v0_ev > 0) || !(l0_angstrom > 0)) {
    throw std::invalid_argument("kappa_from_physical: inputs must be positive");
  }
  return std::cbrt(mass_ratio * l0_angstrom * l0_angstrom * v0_ev / hbar2_over_2me_ev_a2);
}

enum class Preset { hydrogen, carbon };

struct Lattice {
  double kappa = 0.0;
  std::optional<double> v0_ev;
  std::optional<double> l0_angstrom;
  std::optional<double> mass_ratio;
  // Presets pin kappa to a quoted value instead of recomputing it from the
  // physical fields, which then only serve unit conversion.
  bool pinned = false;

  static Lattice from_kappa(double kappa) {
    if (!(kappa > 0) || !std::isfinite(kappa)) {
      throw std::invalid_argument("lattice: kappa must be positive and finite");
    }
    Lattice l;
    l.kappa = kappa;
    return l;
  }

  static Lattice from_physical(double mass_ratio, double v0_ev, double l0_angstrom) {
    Lattice l;
    l.kappa = kappa_from_physical(mass_ratio, v0_ev, l0_angstrom);
    l.v0_ev = v0_ev;
    l.l0_angstrom = l0_angstrom;
    l.mass_ratio = mass_ratio;
    return l;
  }

  // Hydrogen: V0 = 13.6 eV with half-period 1 Å (the quoted kappa 1.526 only
  // fits this reading). Carbon: V0 = 489.99 eV, L0 = 3.08 Å, kappa 10.682.
  static Lattice preset(Preset p) {
    Lattice l = p == Preset::hydrogen ? from_physical(1.0, 13.6, 1.0)
                                      : from_physical(1.0, 489.99, 3.08);
    l.kappa = p == Preset::hydrogen ? 1.526 : 10.682;
    l.pinned = true;
    return l;
  }

  bool has_physical() const { return v0_ev.has_value(); }

  /// kappa recomputed from the physical fields (equals kappa unless pinned).
  std::optional<double> physical_kappa() const {
    if (!has_physical()) return std::nullopt;
    return kappa_from_physical(*mass_ratio, *v0_ev, *l0_angstrom);
  }

  /// The closed IDS/DOS formulas are only established for kappa >= kappa0.
  bool formula_valid() const { return kappa >= kappa0(); }

  double to_ev(double e) const {
    if (!has_physical()) throw std::logic_error("lattice: no physical V0 for eV conversion");
    return e * *v0_ev;
  }
  double from_ev(double energy) const {
    if (!has_physical()) throw std::logic_error("lattice: no physical V0 for eV conversion");
    return energy / *v0_ev;
  }
};

/// Dimensionless potential v(s) = V(x)/V0 at s = x/L0.
inline double potential(double s) {
  const double r = std::fmod(std::abs(s), 2.0);
  return std::min(r, 2.0 - r) - 1.0;
}

/// Potential in eV at x in Å; needs physical fields.
inline double potential(double x_angstrom, const Lattice& lattice) {
  if (!lattice.has_physical()) throw std::logic_error("potential: lattice has no V0, L0");
  return *lattice.v0_ev * potential(x_angstrom / *lattice.l0_angstrom);
}

namespace detail {

inline void require_energy(double e) {
  if (!std::isfinite(e) || !(e > -1.0)) {
    throw std::domain_error("energy e = " + std::to_string(e) + " must satisfy e > -1");
  }
}

// Exact transfer matrix of y'' = t y from t0 to t1 on (y, y_t), assembled
// from scaled Airy values so that only the ratio of the two scales matters.
inline Mat2 airy_transfer(double t0, double t1) {
  const ScaledAiryQuad q0 = airy_eval_scaled(t0);
  const ScaledAiryQuad q1 = airy_eval_scaled(t1);
  const double w = std::exp(q1.log_scale - q0.log_scale);
  if (!std::isfinite(w) || w == 0.0) {
    throw std::overflow_error("airy_transfer: growth factor overflows between t = " +
                              std::to_string(t0) + " and " + std::to_string(t1));
  }
  constexpr double pi = std::numbers::pi;
  return {pi * (q1.ai_s * q0.bip_s / w - q1.bi_s * q0.aip_s * w),
          pi * (-q1.ai_s * q0.bi_s / w + q1.bi_s * q0.ai_s * w),
          pi * (q1.aip_s * q0.bip_s / w - q1.bip_s * q0.aip_s * w),
          pi * (-q1.aip_s * q0.bi_s / w + q1.bip_s * q0.ai_s * w)};
}

}  // namespace detail

/// Rising half-cell [a, b; c, d]: well bottom (t0) to cusp top (t1).
inline Mat2 rising_propagator(double e, double kappa) {
  detail::require_energy(e);
  return detail::airy_transfer(-kappa * (1.0 + e), -kappa * e);
}

/// d/de of the rising propagator, using Ai'' = t Ai at both ends.
inline Mat2 rising_propagator_derivative(double e, double kappa) {
  const Mat2 p = rising_propagator(e, kappa);
  const double t0 = -kappa * (1.0 + e);
  const double t1 = -kappa * e;
  return {-kappa * (p.a21 - t0 * p.a12), -kappa * (p.a22 - p.a11),
          -kappa * (t1 * p.a11 - t0 * p.a22), -kappa * (t1 * p.a12 - p.a21)};
}

/// Mirror image of a half-cell map: J P^{-1} J with J = diag(1, -1).
inline Mat2 mirror(const Mat2& p) { return {p.a22, p.a12, p.a21, p.a11}; }

/// One half-period: rising (bottom to top) or falling (top to bottom).
inline Mat2 half_slope_propagator(double e, bool rising, const Lattice& lattice) {
  const Mat2 p = rising_propagator(e, lattice.kappa);
  return rising ? p : mirror(p);
}

/// One full period starting at a cusp top: falling half, then rising half.
inline Mat2 monodromy(double e, const Lattice& lattice) {
  const Mat2 p = rising_propagator(e, lattice.kappa);
  return p * mirror(p);
}

/// Delta(e) = trace of the monodromy = 2(ad + bc).
inline double discriminant(double e, const Lattice& lattice) {
  const Mat2 p = rising_propagator(e, lattice.kappa);
  return 2.0 * (p.a11 * p.a22 + p.a12 * p.a21);
}

inline double discriminant_derivative(double e, const Lattice& lattice) {
  const Mat2 p = rising_propagator(e, lattice.kappa);
  const Mat2 dp = rising_propagator_derivative(e, lattice.kappa);
  return 2.0 * (dp.a11 * p.a22 + p.a11 * dp.a22 + dp.a12 * p.a21 + p.a12 * dp.a21);
}

/// |Delta| <= 2, written as bc <= 0 and ad >= 0 (Delta - 2 = 4bc and
/// Delta + 2 = 4ad since ad - bc = 1).
inline bool spectrum_indicator(double e, const Lattice& lattice) {
  const Mat2 p = rising_propagator(e, lattice.kappa);
  return p.a12 * p.a21 <= 0.0 && p.a11 * p.a22 >= 0.0;
}

/// The Airy pair normalized at the well bottom t0 = -kappa(1+e) and read off
/// at the cusp top t1 = -kappa e: U = a, U' = c, V = b, V' = d.
struct CellPair {
  double u = 0.0;
  double up = 0.0;
  double v = 0.0;
  double vp = 0.0;
  double product() const { return u * up * v * vp; }
};

inline CellPair cell_pair(double e, const Lattice& lattice) {
  const Mat2 p = rising_propagator(e, lattice.kappa);
  return {p.a11, p.a21, p.a12, p.a22};
}

/// The product criterion U U' V V' <= 0 for membership in the spectrum.
inline bool product_indicator(double e, const Lattice& lattice) {
  return cell_pair(e, lattice).product() <= 0.0;
}

}  // namespace sawtooth
