#pragma once

// Finite-difference eigenvalues of -c psi'' + v(x) psi on [a, b] with the
// three-point Laplacian. Eigenvalue counts below a trial value come from the
// inertia of the shifted matrix (Sturm sequence for the tridiagonal Dirichlet
// case, bordered LDL^T for the periodic/antiperiodic corner terms), and the
// eigenvalues themselves from bisection on that count. Three grids h, h/2, h/4
// give two Richardson extrapolations whose difference is the error estimate.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace sawtooth::oracle {

enum class Boundary { dirichlet, periodic, antiperiodic };

struct FdProblem {
  std::function<double(double)> potential;
  double a = 0.0;
  double b = 1.0;
  std::size_t intervals = 2000;  // coarsest grid
  double kinetic = 1.0;
  Boundary boundary = Boundary::dirichlet;
  std::size_t count = 1;
  double tolerance = 1e-6;
};

struct FdResult {
  std::vector<double> eigenvalues;
  std::vector<double> error_estimates;
  bool converged = false;
};

namespace detail {

struct Discretization {
  std::vector<double> diagonal;
  double offdiag = 0.0;
  double corner = 0.0;  // 0 for dirichlet
  bool cyclic = false;
};

inline Discretization discretize(const FdProblem& p, std::size_t intervals) {
  if (intervals < 4) throw std::invalid_argument("fd: too few intervals");
  Discretization d;
  const double h = (p.b - p.a) / static_cast<double>(intervals);
  const double k = p.kinetic / (h * h);
  d.offdiag = -k;
  if (p.boundary == Boundary::dirichlet) {
    d.diagonal.resize(intervals - 1);
    for (std::size_t j = 1; j < intervals; ++j) {
      d.diagonal[j - 1] = 2.0 * k + p.potential(p.a + h * static_cast<double>(j));
    }
  } else {
    d.cyclic = true;
    d.corner = p.boundary == Boundary::periodic ? -k : k;
    d.diagonal.resize(intervals);
    for (std::size_t j = 0; j < intervals; ++j) {
      d.diagonal[j] = 2.0 * k + p.potential(p.a + h * static_cast<double>(j));
    }
  }
  return d;
}

inline double safe_pivot(double d) {
  constexpr double tiny = 1e-280;
  return d == 0.0 ? -tiny : d;
}

// Number of eigenvalues strictly below lambda.
inline std::size_t inertia_count(const Discretization& m, double lambda) {
  const std::size_t n = m.diagonal.size();
  const double beta = m.offdiag;
  std::size_t negatives = 0;
  if (!m.cyclic) {
    double d = safe_pivot(m.diagonal[0] - lambda);
    if (d < 0) ++negatives;
    for (std::size_t j = 1; j < n; ++j) {
      d = safe_pivot(m.diagonal[j] - lambda - beta * beta / d);
      if (d < 0) ++negatives;
    }
    return negatives;
  }
  // Bordered elimination: rows 0..n-2 are tridiagonal plus a fill column
  // towards row n-1, which is closed off with a Schur complement. Small
  // pivots are absorbed into 2x2 blocks (Bunch's tridiagonal strategy) so
  // that the Schur sum does not cancel.
  constexpr double bunch_alpha = 0.6180339887498949;
  auto border_entry = [&](std::size_t j) {
    return (j == 0 ? m.corner : 0.0) + (j + 2 == n ? beta : 0.0);
  };
  double d = m.diagonal[0] - lambda;
  double border = border_entry(0);
  double schur = 0.0;
  std::size_t j = 0;
  while (j + 1 < n) {
    const bool can_block = j + 2 < n;  // block must not include the last row
    const double e = can_block ? m.diagonal[j + 1] - lambda : 0.0;
    if (!can_block || std::abs(d) * std::max(std::abs(e), std::abs(beta)) >= bunch_alpha * beta * beta) {
      d = safe_pivot(d);
      if (d < 0) ++negatives;
      schur += border * border / d;
      if (j + 2 < n) {
        const double l = beta / d;
        const double next_border = border_entry(j + 1) - l * border;
        d = m.diagonal[j + 1] - lambda - beta * l;
        border = next_border;
      }
      j += 1;
      continue;
    }
    const double det = d * e - beta * beta;
    if (det < 0) {
      ++negatives;
    } else if (d + e < 0) {
      negatives += 2;
    }
    const double c1 = border_entry(j + 1);
    schur += (e * border * border - 2.0 * beta * border * c1 + d * c1 * c1) / det;
    if (j + 3 < n) {
      const double next_border = border_entry(j + 2) - beta * (-beta * border + d * c1) / det;
      d = m.diagonal[j + 2] - lambda - beta * beta * d / det;
      border = next_border;
    }
    j += 2;
  }
  const double last = m.diagonal[n - 1] - lambda - schur;
  if (last < 0 || last == 0.0) ++negatives;
  return negatives;
}

inline std::vector<double> lowest_eigenvalues(const Discretization& m, std::size_t count) {
  if (count > m.diagonal.size()) throw std::invalid_argument("fd: count exceeds matrix size");
  const auto [vmin, vmax] = std::minmax_element(m.diagonal.begin(), m.diagonal.end());
  const double spread = 2.0 * std::abs(m.offdiag) + std::abs(m.corner);
  double floor_value = *vmin - spread - 1.0;
  const double ceiling_value = *vmax + spread + 1.0;
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    double lo = floor_value;
    double hi = ceiling_value;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (inertia_count(m, mid) > k) {
        hi = mid;
      } else {
        lo = mid;
      }
      if (hi - lo <= 1e-15 * std::max(1.0, std::abs(mid))) break;
    }
    out.push_back(0.5 * (lo + hi));
    floor_value = lo;
  }
  return out;
}

}  // namespace detail

/// Eigenvalues below lambda of the discretization with `intervals` intervals.
inline std::size_t fd_count_below(const FdProblem& p, std::size_t intervals, double lambda) {
  return detail::inertia_count(detail::discretize(p, intervals), lambda);
}

/// Lowest `count` eigenvalues of the discretization with `intervals`
/// intervals, without extrapolation.
inline std::vector<double> fd_raw_eigenvalues(const FdProblem& p, std::size_t intervals) {
  return detail::lowest_eigenvalues(detail::discretize(p, intervals), p.count);
}

inline FdResult fd_eigensolve(const FdProblem& p) {
  const auto coarse = fd_raw_eigenvalues(p, p.intervals);
  const auto medium = fd_raw_eigenvalues(p, 2 * p.intervals);
  const auto fine = fd_raw_eigenvalues(p, 4 * p.intervals);
  // Inertia counts are backward stable, so each raw eigenvalue carries a
  // rounding floor of a few eps * ||A|| on the finest grid.
  const double h_fine = (p.b - p.a) / static_cast<double>(4 * p.intervals);
  double vmax = 0.0;
  for (std::size_t j = 0; j <= 4 * p.intervals; ++j)
    vmax = std::max(vmax, std::abs(p.potential(p.a + h_fine * static_cast<double>(j))));
  const double noise = 16.0 * std::numeric_limits<double>::epsilon() *
                       (4.0 * p.kinetic / (h_fine * h_fine) + vmax);
  FdResult r;
  r.converged = true;
  for (std::size_t k = 0; k < p.count; ++k) {
    const double ext_coarse = (4.0 * medium[k] - coarse[k]) / 3.0;
    const double ext_fine = (4.0 * fine[k] - medium[k]) / 3.0;
    const double err = std::abs(ext_fine - ext_coarse) + noise;
    r.eigenvalues.push_back(ext_fine);
    r.error_estimates.push_back(err);
    if (err > p.tolerance * std::max(1.0, std::abs(ext_fine))) r.converged = false;
  }
  return r;
}

/// The 2-periodic sawtooth v(s) = dist(s, 2Z) - 1 in units of the well depth.
inline double sawtooth_potential(double s) {
  const double r = std::fmod(std::abs(s), 2.0);
  return std::min(r, 2.0 - r) - 1.0;
}

}  // namespace sawtooth::oracle
