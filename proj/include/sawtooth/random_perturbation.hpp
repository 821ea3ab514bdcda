#pragma once

// Depth-disordered sawtooth chain: well n has potential d_n (|s - s_n| - 1)
// with d_n = 1 + delta omega_n, omega_n uniform on [0, 1). Dividing by d_n
// turns each well into the periodic cell with kappa_n = kappa d_n^{1/3} and
// energy e / d_n, so the Airy half-cell maps are reused unchanged.
//
// Levels below e are counted with the oscillation theorem: the number of
// zeros of the solution that decays to the left, including a possible zero
// in the right exterior where psi = A exp(-q s) + B exp(q s).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "sawtooth/csv.hpp"
#include "sawtooth/detail/parallel.hpp"
#include "sawtooth/lattice.hpp"
#include "sawtooth/oracle/fd_eigensolver.hpp"
#include "sawtooth/spectral_density.hpp"

namespace sawtooth {

struct DisorderConfig {
  Lattice lattice = Lattice::from_kappa(2.8);
  double delta = 0.3;
  int n_sites = 401;
  int samples = 100;
  std::uint64_t seed = 1;
};

inline void validate(const DisorderConfig& c) {
  if (!(c.delta >= 0.0) || !std::isfinite(c.delta)) throw std::invalid_argument("delta must be >= 0");
  if (c.n_sites < 1) throw std::invalid_argument("n_sites must be >= 1");
  if (c.samples < 1) throw std::invalid_argument("samples must be >= 1");
  if (!(c.lattice.kappa > 0.0)) throw std::invalid_argument("kappa must be > 0");
}

/// Relative well depths d_n in [1, 1 + delta] (multiply by V0 for eV) of one
/// sample. Each sample has its own stream keyed by (seed, sample_index).
inline std::vector<double> sample_depths(const DisorderConfig& c, std::uint64_t sample_index) {
  validate(c);
  std::seed_seq seq{static_cast<std::uint32_t>(c.seed), static_cast<std::uint32_t>(c.seed >> 32),
                    static_cast<std::uint32_t>(sample_index),
                    static_cast<std::uint32_t>(sample_index >> 32)};
  std::mt19937_64 rng(seq);
  std::vector<double> d(static_cast<std::size_t>(c.n_sites));
  for (auto& x : d) {
    const double omega = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    x = 1.0 + c.delta * omega;
  }
  return d;
}

/// Number of levels strictly below e < 0 of the chain with the given depths.
inline int chain_count_below(double e, const std::vector<double>& depths, double kappa) {
  if (!(e < 0.0)) throw std::domain_error("chain_count_below: need e < 0");
  const double q = std::pow(kappa, 1.5) * std::sqrt(-e);
  Vec2 y{1.0, q};  // (psi, dpsi/ds), decaying to the left
  double phase = std::atan2(y.x, y.y / kappa);
  for (double d : depths) {
    const double kn = kappa * std::cbrt(d);
    const double en = e / d;
    const double t_bottom = -kn * (1.0 + en);
    const double t_top = -kn * en;
    // Falling half: t runs top -> bottom and dpsi/dt = -psi_s / kn.
    // Rising half: t runs bottom -> top and dpsi/dt = +psi_s / kn.
    for (int half = 0; half < 2; ++half) {
      const bool rising = half == 1;
      const double from = rising ? t_bottom : t_top;
      const double to = rising ? t_top : t_bottom;
      const double dir = rising ? 1.0 : -1.0;
      Vec2 yt{y.x, dir * y.y / kn};
      double t = from;
      while (t != to) {
        double dt = 1.5 / std::max(1.0, std::abs(t));
        double t_next = t + dir * dt;
        if ((rising && t_next >= to - 1e-12) || (!rising && t_next <= to + 1e-12)) t_next = to;
        yt = detail::airy_transfer(t, t_next) * yt;
        const double r = std::hypot(yt.x, yt.y);
        yt.x /= r;
        yt.y /= r;
        // In the direction of travel the angle of (psi, dpsi/dsigma) only
        // crosses multiples of pi upward.
        const double raw = std::atan2(yt.x, dir * yt.y);
        phase += std::remainder(raw - phase, 2.0 * std::numbers::pi);
        t = t_next;
      }
      y = {yt.x, dir * yt.y * kn};
    }
  }
  int zeros = static_cast<int>(std::floor(phase / std::numbers::pi));
  const double a = 0.5 * (y.x - y.y / q);
  const double b = 0.5 * (y.x + y.y / q);
  if (a * b < 0.0 && std::abs(a) > std::abs(b)) ++zeros;
  return zeros;
}

/// Lowest level of the chain, by bisection on the count (absolute 1e-12).
inline double chain_lowest_level(const std::vector<double>& depths, double kappa) {
  const double deepest = *std::max_element(depths.begin(), depths.end());
  double lo = -deepest;  // no level below the potential minimum
  double hi = -1e-300;
  if (chain_count_below(hi, depths, kappa) == 0) {
    throw std::runtime_error("chain_lowest_level: no bound state below 0");
  }
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (chain_count_below(mid, depths, kappa) >= 1) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

/// Finite-difference count for the same chain in a Dirichlet box padded by
/// `pad` half-periods of zero potential on each side (test oracle).
inline std::size_t fd_chain_count_below(double e, const std::vector<double>& depths, double kappa,
                                        double pad = 10.0, double h = 0.005) {
  const double n = static_cast<double>(depths.size());
  oracle::FdProblem p;
  p.a = -n - pad;
  p.b = n + pad;
  p.kinetic = 1.0 / (kappa * kappa * kappa);
  p.boundary = oracle::Boundary::dirichlet;
  p.potential = [&depths, n](double s) {
    const double u = s + n;  // 0 at the left end of the chain
    if (u <= 0.0 || u >= 2.0 * n) return 0.0;
    const auto well = std::min(static_cast<std::size_t>(u / 2.0), depths.size() - 1);
    return depths[well] * (std::abs(u - 2.0 * double(well) - 1.0) - 1.0);
  };
  const auto intervals = static_cast<std::size_t>(std::ceil((p.b - p.a) / h));
  return oracle::fd_count_below(p, intervals, e);
}

/// Compares transfer-matrix and finite-difference counts on an 11-well chain
/// of the configuration's first sample; throws if they differ by more than
/// one level at any of the given energies.
inline void calibrate_counts(const DisorderConfig& c, const std::vector<double>& energies) {
  DisorderConfig small = c;
  small.n_sites = 11;
  const auto depths = sample_depths(small, 0);
  for (double e : energies) {
    if (!(e < 0.0)) continue;
    const int tm = chain_count_below(e, depths, c.lattice.kappa);
    const auto fd = static_cast<int>(fd_chain_count_below(e, depths, c.lattice.kappa));
    if (std::abs(tm - fd) > 1) {
      throw std::runtime_error("calibration failed at e = " + format_double(e) +
                               ": transfer count " + std::to_string(tm) + ", fd count " +
                               std::to_string(fd));
    }
  }
}

struct EmpiricalIds {
  std::vector<double> e;
  std::vector<double> mean;
  std::vector<double> stderr_mean;
};

/// Sample mean and standard error of count/(2 n_sites) on the grid (all < 0).
inline EmpiricalIds empirical_ids(const DisorderConfig& c, const std::vector<double>& grid,
                                  unsigned threads = 0) {
  validate(c);
  for (double e : grid) {
    if (!(e < 0.0)) throw std::domain_error("empirical_ids: grid must lie below 0");
  }
  const auto samples = static_cast<std::size_t>(c.samples);
  std::vector<std::vector<double>> per(samples, std::vector<double>(grid.size()));
  detail::parallel_for(
      samples,
      [&](std::size_t s) {
        const auto depths = sample_depths(c, s);
        for (std::size_t i = 0; i < grid.size(); ++i) {
          per[s][i] = chain_count_below(grid[i], depths, c.lattice.kappa) / (2.0 * c.n_sites);
        }
      },
      threads);
  EmpiricalIds out;
  out.e = grid;
  out.mean.assign(grid.size(), 0.0);
  out.stderr_mean.assign(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double sum = 0.0;
    for (std::size_t s = 0; s < samples; ++s) sum += per[s][i];
    const double mean = sum / double(samples);
    double ss = 0.0;
    for (std::size_t s = 0; s < samples; ++s) ss += (per[s][i] - mean) * (per[s][i] - mean);
    out.mean[i] = mean;
    out.stderr_mean[i] = samples > 1 ? std::sqrt(ss / double(samples - 1) / double(samples)) : 0.0;
  }
  return out;
}

struct LifshitzFit {
  double e0_hat = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  double exponent = 0.0;  // slope of ln(-ln IDS) against ln(e - e0_hat)
  double stderr_slope = 0.0;
  int points = 0;
  double slope_lower_half = 0.0;
  double slope_upper_half = 0.0;
  double r2_lifshitz = 0.0;  // R^2 of ln(-ln IDS) against ln(e - e0)
  double r2_power = 0.0;     // R^2 of ln IDS against ln(e - e0)
  // Half-window slopes differ by more than 10% of |exponent|, or a power law
  // IDS ~ (e - e0)^a explains the data at least as well as the Lifshitz form.
  bool mismatch = false;
};

namespace detail {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
};

inline double r_squared(const std::vector<double>& x, const std::vector<double>& y,
                        const LineFit& f) {
  double my = 0;
  for (double v : y) my += v;
  my /= double(y.size());
  double ssr = 0, sst = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    ssr += r * r;
    sst += (y[i] - my) * (y[i] - my);
  }
  return sst > 0 ? 1.0 - ssr / sst : 1.0;
}

inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    ssr += r * r;
  }
  f.stderr_slope = x.size() > 2 ? std::sqrt(ssr / (n - 2.0) / sxx) : 0.0;
  return f;
}

}  // namespace detail

/// Fits ln(-ln IDS) = c + s ln(e - e0_hat) over the points with
/// e > e0_hat and 0 < IDS < 1/2.
inline LifshitzFit lifshitz_fit(const std::vector<double>& e, const std::vector<double>& ids,
                                double e0_hat) {
  if (e.size() != ids.size()) throw std::invalid_argument("lifshitz_fit: size mismatch");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (e[i] > e0_hat && ids[i] > 0.0 && ids[i] < 0.5) {
      x.push_back(std::log(e[i] - e0_hat));
      y.push_back(std::log(-std::log(ids[i])));
    }
  }
  if (x.size() < 8) {
    throw std::runtime_error("lifshitz_fit: only " + std::to_string(x.size()) +
                             " usable points (need 8)");
  }
  LifshitzFit fit;
  fit.e0_hat = e0_hat;
  fit.points = static_cast<int>(x.size());
  fit.window_lo = e0_hat + std::exp(*std::min_element(x.begin(), x.end()));
  fit.window_hi = e0_hat + std::exp(*std::max_element(x.begin(), x.end()));
  const auto all = detail::least_squares(x, y);
  fit.exponent = all.slope;
  fit.stderr_slope = all.stderr_slope;
  const std::size_t half = x.size() / 2;  // points arrive in energy order
  const auto lower = detail::least_squares({x.begin(), x.begin() + half}, {y.begin(), y.begin() + half});
  const auto upper = detail::least_squares({x.begin() + half, x.end()}, {y.begin() + half, y.end()});
  fit.slope_lower_half = lower.slope;
  fit.slope_upper_half = upper.slope;
  std::vector<double> log_ids(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) log_ids[i] = -std::exp(y[i]);
  fit.r2_lifshitz = detail::r_squared(x, y, all);
  fit.r2_power = detail::r_squared(x, log_ids, detail::least_squares(x, log_ids));
  fit.mismatch = !(std::abs(lower.slope - upper.slope) <= 0.10 * std::abs(all.slope)) ||
                 fit.r2_power >= fit.r2_lifshitz;
  return fit;
}

struct LifshitzOptions {
  double ids_cap = 0.05;  // window ends where the mean IDS reaches this value
  int grid_points = 200;
  bool calibrate = true;
  unsigned threads = 0;
};

struct LifshitzRun {
  EmpiricalIds curve;
  LifshitzFit fit;
  double lowest_level = 0.0;  // minimum over samples
};

inline LifshitzRun run_lifshitz(const DisorderConfig& c, const LifshitzOptions& opt = {}) {
  validate(c);
  if (opt.grid_points < 8) throw std::invalid_argument("lifshitz: need at least 8 grid points");
  if (!(opt.ids_cap > 0.0 && opt.ids_cap < 0.5)) throw std::invalid_argument("lifshitz: ids_cap in (0, 1/2)");
  const auto samples = static_cast<std::size_t>(c.samples);
  const double kappa = c.lattice.kappa;
  std::vector<std::vector<double>> depths(samples);
  std::vector<double> lowest(samples);
  detail::parallel_for(
      samples,
      [&](std::size_t s) {
        depths[s] = sample_depths(c, s);
        lowest[s] = chain_lowest_level(depths[s], kappa);
      },
      opt.threads);
  LifshitzRun run;
  run.lowest_level = *std::min_element(lowest.begin(), lowest.end());
  auto mean_ids = [&](double e) {
    std::vector<int> counts(samples);
    detail::parallel_for(
        samples, [&](std::size_t s) { counts[s] = chain_count_below(e, depths[s], kappa); },
        opt.threads);
    double total = 0.0;
    for (int k : counts) total += k;
    return total / (2.0 * c.n_sites * double(samples));
  };
  double lo = run.lowest_level;
  double hi = -1e-12;
  if (mean_ids(hi) < opt.ids_cap) {
    throw std::runtime_error("lifshitz: mean IDS below 0 never reaches ids_cap");
  }
  while (hi - lo > 1e-10 * std::max(1.0, std::abs(lo))) {
    const double mid = 0.5 * (lo + hi);
    if (mean_ids(mid) >= opt.ids_cap) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  const double top = hi;
  const double step = (top - run.lowest_level) / double(opt.grid_points - 1);
  std::vector<double> grid(static_cast<std::size_t>(opt.grid_points));
  for (int j = 0; j < opt.grid_points; ++j) grid[j] = run.lowest_level + step * j;
  grid.back() = top;
  if (opt.calibrate) {
    std::vector<double> probe;
    for (int j = 0; j < 5; ++j) probe.push_back(grid[static_cast<std::size_t>(j * (opt.grid_points - 1) / 4)]);
    calibrate_counts(c, probe);
  }
  run.curve = empirical_ids(c, grid, opt.threads);
  run.fit = lifshitz_fit(run.curve.e, run.curve.mean, run.lowest_level - step);
  return run;
}

inline std::string to_csv(const EmpiricalIds& curve, const Lattice& lattice, EnergyUnit unit) {
  std::string out = csv_line({"E", "e", "ids_mean", "ids_stderr"});
  for (std::size_t i = 0; i < curve.e.size(); ++i) {
    const double energy = unit == EnergyUnit::ev ? lattice.to_ev(curve.e[i]) : curve.e[i];
    out += csv_line({format_double(energy), format_double(curve.e[i]), format_double(curve.mean[i]),
                     format_double(curve.stderr_mean[i])});
  }
  return out;
}

}  // namespace sawtooth
