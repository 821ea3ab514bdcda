#pragma once

// Band edges of the sawtooth lattice. Delta - 2 = 4bc and Delta + 2 = 4ad for
// the rising half-cell [a, b; c, d], so the edges are exactly the zeros of the
// four entries as functions of e: b, c give periodic edges (Delta = +2), a, d
// antiperiodic ones (Delta = -2). Each entry is the end value of a half-cell
// Sturm-Liouville problem, so the number of its zeros below e is known from
// a Prufer angle; that count validates the scan.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "sawtooth/lattice.hpp"
#include "sawtooth/roots.hpp"

namespace sawtooth {

enum class EdgeType { periodic, antiperiodic };

struct Band {
  int p = 0;
  double e_min = 0.0;
  double e_max = 0.0;
  EdgeType lower = EdgeType::periodic;
  EdgeType upper = EdgeType::antiperiodic;

  double width() const { return e_max - e_min; }
  double midpoint() const { return 0.5 * (e_min + e_max); }
  bool contains(double e) const { return e >= e_min && e <= e_max; }
};

struct BandTable {
  double kappa = 0.0;
  double e_ceiling = 0.0;
  std::vector<Band> bands;

  /// Energies up to here are classified (band or gap).
  double coverage() const {
    return bands.empty() ? e_ceiling : std::max(e_ceiling, bands.back().e_max);
  }
};

/// Entry of the rising half-cell matrix, in the order a, b, c, d.
enum class CellEntry { a = 0, b = 1, c = 2, d = 3 };

namespace detail {

inline double entry_of(const Mat2& m, int k) {
  switch (k) {
    case 0: return m.a11;
    case 1: return m.a12;
    case 2: return m.a21;
    default: return m.a22;
  }
}

// Unwrapped Prufer angle (psi = r sin theta, psi_t = r cos theta) at t1 of the
// solution leaving t0 with angle theta0. Substeps keep max(1,|t|) dt <= 1.5,
// which bounds each angle increment below pi.
inline double prufer_angle(double t0, double t1, double theta0) {
  Vec2 y{std::sin(theta0), std::cos(theta0)};
  double theta = theta0;
  double t = t0;
  while (t < t1) {
    const double dt = std::min(1.5 / std::max(1.0, std::abs(t)), t1 - t);
    const double t_next = (t1 - t - dt) < 1e-12 ? t1 : t + dt;
    y = airy_transfer(t, t_next) * y;
    const double r = std::hypot(y.x, y.y);
    y.x /= r;
    y.y /= r;
    const double raw = std::atan2(y.x, y.y);
    theta += std::remainder(raw - theta, 2.0 * std::numbers::pi);
    t = t_next;
  }
  return theta;
}

}  // namespace detail

/// Number of zeros of the given half-cell entry on (-1, e).
inline int entry_zero_count(CellEntry entry, double e, double kappa) {
  detail::require_energy(e);
  const bool even_start = entry == CellEntry::a || entry == CellEntry::c;
  const bool dirichlet_end = entry == CellEntry::a || entry == CellEntry::b;
  const double theta0 = even_start ? 0.5 * std::numbers::pi : 0.0;
  const double theta = detail::prufer_angle(-kappa * (1.0 + e), -kappa * e, theta0);
  const double turns = theta / std::numbers::pi;
  return static_cast<int>(std::floor(dirichlet_end ? turns : turns + 0.5));
}

namespace detail {

struct Edge {
  double e;
  EdgeType type;
};

inline EdgeType expected_type(std::size_t k) {
  return (k % 4 == 0 || k % 4 == 3) ? EdgeType::periodic : EdgeType::antiperiodic;
}

// Zeros of all four entries on (-1, hi], scanned with the given step.
inline std::array<std::vector<double>, 4> scan_entry_zeros(double kappa, double hi, double step) {
  std::array<std::vector<double>, 4> zeros;
  const auto n = static_cast<std::size_t>(std::ceil((hi + 1.0) / step));
  const double h = (hi + 1.0) / static_cast<double>(n);
  double e_prev = -1.0 + 1e-15;  // no edge can sit this close to the well bottom
  Mat2 m_prev = rising_propagator(e_prev, kappa);
  for (std::size_t j = 1; j <= n; ++j) {
    const double e = j == n ? hi : -1.0 + h * static_cast<double>(j);
    const Mat2 m = rising_propagator(e, kappa);
    for (int k = 0; k < 4; ++k) {
      const double f0 = entry_of(m_prev, k);
      const double f1 = entry_of(m, k);
      if (std::signbit(f0) == std::signbit(f1)) continue;
      auto f = [kappa, k](double x) { return entry_of(rising_propagator(x, kappa), k); };
      zeros[k].push_back(solve_bracketed(f, e_prev, e, f0, f1, 1e-15));
    }
    e_prev = e;
    m_prev = m;
  }
  return zeros;
}

}  // namespace detail

struct BandEdgeOptions {
  double max_step = 1e-3;
  int max_halvings = 10;
};

/// All bands with e_min <= e_ceiling, edges refined to rounding level.
inline BandTable band_edges(const Lattice& lattice, double e_ceiling, BandEdgeOptions opt = {}) {
  if (!(e_ceiling > -1.0) || !std::isfinite(e_ceiling)) {
    throw std::domain_error("band_edges: e_ceiling must be finite and > -1");
  }
  const double kappa = lattice.kappa;
  double hi = e_ceiling;
  for (;;) {
    // Level spacing from the WKB count (2/pi) zeta; keep >= 8 samples per level.
    const double dpde = 2.0 / std::numbers::pi * std::pow(kappa, 1.5) * std::sqrt(1.0 + hi);
    double step = std::min(opt.max_step, 1.0 / (8.0 * std::max(dpde, 1e-300)));
    std::array<std::vector<double>, 4> zeros;
    bool validated = false;
    for (int attempt = 0; attempt <= opt.max_halvings && !validated; ++attempt, step *= 0.5) {
      zeros = detail::scan_entry_zeros(kappa, hi, step);
      validated = true;
      for (int k = 0; k < 4; ++k) {
        const int want = entry_zero_count(static_cast<CellEntry>(k), hi, kappa);
        if (static_cast<int>(zeros[k].size()) != want) validated = false;
      }
    }
    if (!validated) {
      throw std::runtime_error("band_edges: scan could not isolate all edges below e = " +
                               std::to_string(hi));
    }
    std::vector<detail::Edge> edges;
    for (int k = 0; k < 4; ++k) {
      const EdgeType type =
          (k == 1 || k == 2) ? EdgeType::periodic : EdgeType::antiperiodic;
      for (double z : zeros[k]) edges.push_back({z, type});
    }
    std::sort(edges.begin(), edges.end(),
              [](const detail::Edge& x, const detail::Edge& y) { return x.e < y.e; });
    const auto below = static_cast<std::size_t>(
        std::count_if(edges.begin(), edges.end(), [&](const detail::Edge& x) {
          return x.e <= e_ceiling;
        }));
    if (below % 2 == 1 && edges.size() == below) {
      hi += 0.25;  // the band straddling the ceiling closes further up
      continue;
    }
    // Near-coincident edges (bands thinner than rounding) may sort in either
    // order; their types then follow the alternation pattern.
    for (std::size_t k = 0; k < edges.size(); ++k) {
      if (edges[k].type == detail::expected_type(k)) continue;
      const double tie = 1e-13 * std::max(1.0, std::abs(edges[k].e));
      if (k + 1 < edges.size() && edges[k + 1].type == detail::expected_type(k) &&
          edges[k + 1].e - edges[k].e <= tie) {
        std::swap(edges[k].type, edges[k + 1].type);
        continue;
      }
      throw std::runtime_error("band_edges: edge types out of sequence near e = " +
                               std::to_string(edges[k].e));
    }
    BandTable table;
    table.kappa = kappa;
    table.e_ceiling = e_ceiling;
    const std::size_t n_bands = (below + 1) / 2;
    for (std::size_t p = 0; p < n_bands; ++p) {
      table.bands.push_back({static_cast<int>(p), edges[2 * p].e, edges[2 * p + 1].e,
                             edges[2 * p].type, edges[2 * p + 1].type});
    }
    return table;
  }
}

/// Position of e relative to the band table: inside band p, or in the gap
/// above band p (p = -1 below the spectrum).
struct BandLocation {
  int p = -1;
  bool in_gap = true;
  bool operator==(const BandLocation&) const = default;
};

inline BandLocation band_index(double e, const BandTable& table) {
  if (!(e <= table.coverage())) {
    throw std::out_of_range("band_index: e = " + std::to_string(e) +
                            " beyond band table coverage " + std::to_string(table.coverage()));
  }
  const auto& bands = table.bands;
  // First band whose upper edge is >= e.
  const auto it = std::lower_bound(bands.begin(), bands.end(), e,
                                   [](const Band& b, double x) { return b.e_max < x; });
  if (it != bands.end() && it->e_min <= e) return {it->p, false};
  return {static_cast<int>(it - bands.begin()) - 1, true};
}

}  // namespace sawtooth
