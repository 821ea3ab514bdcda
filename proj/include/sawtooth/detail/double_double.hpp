#pragma once

#include <cmath>

namespace sawtooth::detail {

// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2.
struct DoubleDouble {
  double hi = 0.0;
  double lo = 0.0;
};

inline DoubleDouble two_sum(double a, double b) {
  const double s = a + b;
  const double bb = s - a;
  const double err = (a - (s - bb)) + (b - bb);
  return {s, err};
}

inline DoubleDouble quick_two_sum(double a, double b) {
  const double s = a + b;
  return {s, b - (s - a)};
}

inline DoubleDouble two_prod(double a, double b) {
  const double p = a * b;
  return {p, std::fma(a, b, -p)};
}

inline DoubleDouble operator+(DoubleDouble a, DoubleDouble b) {
  DoubleDouble s = two_sum(a.hi, b.hi);
  s.lo += a.lo + b.lo;
  return quick_two_sum(s.hi, s.lo);
}

inline DoubleDouble operator-(DoubleDouble a) { return {-a.hi, -a.lo}; }

inline DoubleDouble operator-(DoubleDouble a, DoubleDouble b) { return a + (-b); }

inline DoubleDouble operator*(DoubleDouble a, double b) {
  DoubleDouble p = two_prod(a.hi, b);
  p.lo += a.lo * b;
  return quick_two_sum(p.hi, p.lo);
}

inline DoubleDouble operator*(DoubleDouble a, DoubleDouble b) {
  DoubleDouble p = two_prod(a.hi, b.hi);
  p.lo += a.hi * b.lo + a.lo * b.hi;
  return quick_two_sum(p.hi, p.lo);
}

inline constexpr DoubleDouble dd_two_pi{6.283185307179586, 2.4492935982947064e-16};
inline constexpr DoubleDouble dd_quarter_pi{0.7853981633974483, 3.061616997868383e-17};
inline constexpr DoubleDouble dd_two_thirds{0.6666666666666666, 3.700743415417188e-17};

// sqrt(y) to double-double accuracy via one Newton correction.
inline DoubleDouble dd_sqrt(double y) {
  const double s = std::sqrt(y);
  const double residual = std::fma(-s, s, y);
  return quick_two_sum(s, residual / (2.0 * s));
}

// Reduces a double-double angle into [-pi, pi].
inline DoubleDouble reduce_two_pi(DoubleDouble theta) {
  const double n = std::nearbyint(theta.hi / dd_two_pi.hi);
  return theta - dd_two_pi * n;
}

}  // namespace sawtooth::detail
