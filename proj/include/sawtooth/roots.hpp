#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include <boost/math/tools/toms748_solve.hpp>

namespace sawtooth {

/// Refines a sign-changing bracket [lo, hi] of `f` until its width is at most
/// `abs_tol` and returns the bracket midpoint. The caller supplies f(lo) and
/// f(hi) so that scan values are not recomputed.
template <class F>
double solve_bracketed(F&& f, double lo, double hi, double f_lo, double f_hi,
                       double abs_tol) {
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if (std::signbit(f_lo) == std::signbit(f_hi)) {
    throw std::invalid_argument("solve_bracketed: no sign change on [" +
                                std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  const double floor_tol = 4.0 * std::numeric_limits<double>::epsilon() *
                           std::max(std::abs(lo), std::abs(hi));
  const double tol = std::max(abs_tol, floor_tol);
  std::uintmax_t max_iter = 300;
  auto stop = [tol](double a, double b) { return std::abs(b - a) <= tol; };
  const auto [a, b] =
      boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, stop, max_iter);
  if (!stop(a, b)) {
    // toms748 hit its iteration cap without meeting the tolerance; the
    // bracket is still valid, so finish by bisection.
    double x0 = a, x1 = b, f0 = f(a);
    while (std::abs(x1 - x0) > tol) {
      const double mid = 0.5 * (x0 + x1);
      const double fm = f(mid);
      if (fm == 0.0) return mid;
      if (std::signbit(fm) == std::signbit(f0)) {
        x0 = mid;
        f0 = fm;
      } else {
        x1 = mid;
      }
    }
    return 0.5 * (x0 + x1);
  }
  return 0.5 * (a + b);
}

/// Largest root of `f` below `start`, found by stepping downward with `step`
/// until the sign flips, then refining to rounding level.
template <class F>
double largest_root_below(F&& f, double start, double step, double limit) {
  double hi = start;
  double f_hi = f(hi);
  while (hi > limit) {
    const double lo = hi - step;
    const double f_lo = f(lo);
    if (f_lo == 0.0) return lo;
    if (std::signbit(f_lo) != std::signbit(f_hi)) {
      return solve_bracketed(f, lo, hi, f_lo, f_hi, 0.0);
    }
    hi = lo;
    f_hi = f_lo;
  }
  throw std::runtime_error("largest_root_below: no sign change above limit");
}

}  // namespace sawtooth
