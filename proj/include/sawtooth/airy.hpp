#pragma once

// Airy functions Ai, Bi and their derivatives on the real line.
//
// |x| <= 10: local Taylor expansion of the Airy equation y'' = x y about the
//            nearest node of a half-unit anchor grid. Anchor values are
//            generated once in extended precision by Taylor stepping out of
//            the origin (Bi everywhere, Ai for x < 0) and, for the recessive
//            Ai on x > 0, by stepping backward from the asymptotic value at 12.
// |x| > 10:  asymptotic expansions in zeta = (2/3)|x|^{3/2}; on x < 0 the
//            phase zeta - pi/4 is reduced modulo 2 pi in double-double.

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>

#include "sawtooth/detail/double_double.hpp"
#include "sawtooth/roots.hpp"

namespace sawtooth {

struct AiryQuad {
  double x = 0.0;
  double ai = 0.0;
  double bi = 0.0;
  double aip = 0.0;
  double bip = 0.0;
};

/// For x > 0 holds Ai e^{zeta}, Ai' e^{zeta}, Bi e^{-zeta}, Bi' e^{-zeta} with
/// zeta = (2/3) x^{3/2} stored in log_scale. For x <= 0, log_scale = 0 and the
/// values are unscaled.
struct ScaledAiryQuad {
  double x = 0.0;
  double ai_s = 0.0;
  double bi_s = 0.0;
  double aip_s = 0.0;
  double bip_s = 0.0;
  double log_scale = 0.0;

  AiryQuad unscaled() const {
    const double down = std::exp(-log_scale);
    const double up = std::exp(log_scale);
    if (!std::isfinite(up)) {
      throw std::overflow_error("Bi(" + std::to_string(x) + ") overflows double");
    }
    return {x, ai_s * down, bi_s * up, aip_s * down, bip_s * up};
  }
};

/// Fundamental pair of the Airy equation with U(0)=1, U'(0)=0, V(0)=0, V'(0)=1.
struct PairQuad {
  double x = 0.0;
  double u = 0.0;
  double v = 0.0;
  double up = 0.0;
  double vp = 0.0;
};

namespace detail {

inline constexpr long double ai_zero = 0.355028053887817239260063186004183176L;
inline constexpr long double aip_zero = -0.258819403792806798405183560189203963L;
inline constexpr long double bi_zero = 0.614926627446000735150922369093613554L;
inline constexpr long double bip_zero = 0.448288357353826357914823710398828391L;

inline constexpr double anchor_spacing = 0.5;
inline constexpr double anchor_reach = 10.0;
inline constexpr int anchor_count = 41;  // nodes -10, -9.5, ..., 10

template <class T>
struct Solution {
  T y;
  T yp;
};

// Taylor expansion of a solution of y'' = x y about x0, evaluated at x0 + d.
// Coefficients obey c_{n+2} = (x0 c_n + c_{n-1}) / ((n+2)(n+1)).
template <class T>
Solution<T> taylor_step(T x0, Solution<T> s0, T d) {
  const T eps = std::numeric_limits<T>::epsilon();
  T c_prev = 0;       // c_{n-1}
  T c_cur = s0.y;     // c_n
  T c_next = s0.yp;   // c_{n+1}
  T value = s0.y + s0.yp * d;
  T slope = s0.yp;
  T d_pow = d;        // d^{n+1}
  int quiet = 0;
  for (int n = 0; n < 400; ++n) {
    const T c_new = (x0 * c_cur + c_prev) / (T(n + 2) * T(n + 1));
    const T term_slope = T(n + 2) * c_new * d_pow;
    d_pow *= d;
    const T term_value = c_new * d_pow;
    value += term_value;
    slope += term_slope;
    c_prev = c_cur;
    c_cur = c_next;
    c_next = c_new;
    const T scale = std::abs(value) + std::abs(slope * d) + std::numeric_limits<T>::min();
    if (std::abs(term_value) + std::abs(term_slope * d) <= eps * scale) {
      if (++quiet == 3) break;
    } else {
      quiet = 0;
    }
  }
  return {value, slope};
}

// u_k of the Airy asymptotic expansions; v_k = -(6k+1)/(6k-1) u_k.
inline constexpr int asymptotic_terms = 40;

struct AsymptoticCoefficients {
  std::array<long double, asymptotic_terms> u{};
  std::array<long double, asymptotic_terms> v{};
};

inline const AsymptoticCoefficients& asymptotic_coefficients() {
  static const AsymptoticCoefficients table = [] {
    AsymptoticCoefficients t;
    t.u[0] = 1.0L;
    t.v[0] = 1.0L;
    for (int k = 1; k < asymptotic_terms; ++k) {
      const long double kk = k;
      t.u[k] = t.u[k - 1] * (6 * kk - 5) * (6 * kk - 3) * (6 * kk - 1) /
               ((2 * kk - 1) * 216 * kk);
      t.v[k] = -(6 * kk + 1) / (6 * kk - 1) * t.u[k];
    }
    return t;
  }();
  return table;
}

// Sum of sign^k c_k zeta^{-k} (k >= first, stride 2 when `stride` == 2),
// stopping once terms fall below relative eps or start to grow.
template <class T>
T asymptotic_sum(const std::array<long double, asymptotic_terms>& c, T inv_zeta,
                 int first, int stride, int sign) {
  const T eps = std::numeric_limits<T>::epsilon();
  T sum = 0;
  T power = 1;
  for (int k = 0; k < first; ++k) power *= inv_zeta;
  const T step_power = stride == 2 ? inv_zeta * inv_zeta : inv_zeta;
  T last = std::numeric_limits<T>::infinity();
  int j = 0;
  for (int k = first; k < asymptotic_terms; k += stride, ++j) {
    const T alternate = (sign < 0 && (j % 2 == 1)) ? T(-1) : T(1);
    const T term = alternate * T(c[k]) * power;
    if (std::abs(term) > std::abs(last)) break;
    sum += term;
    if (std::abs(term) <= eps * std::abs(sum)) break;
    last = term;
    power *= step_power;
  }
  return sum;
}

// Scaled values for x > 0 from the asymptotic expansions.
template <class T>
std::array<T, 4> asymptotic_positive_scaled(T x) {
  const auto& coef = asymptotic_coefficients();
  const T root = std::sqrt(x);
  const T zeta = T(2) / T(3) * x * root;
  const T quarter = std::sqrt(root);
  const T inv_zeta = T(1) / zeta;
  const T sqrt_pi = std::sqrt(std::numbers::pi_v<T>);
  const T su = asymptotic_sum(coef.u, inv_zeta, 0, 1, +1);
  const T sv = asymptotic_sum(coef.v, inv_zeta, 0, 1, +1);
  const T su_alt = asymptotic_sum(coef.u, inv_zeta, 0, 1, -1);
  const T sv_alt = asymptotic_sum(coef.v, inv_zeta, 0, 1, -1);
  return {su_alt / (2 * sqrt_pi * quarter),   // Ai e^{zeta}
          su / (sqrt_pi * quarter),           // Bi e^{-zeta}
          -quarter * sv_alt / (2 * sqrt_pi),  // Ai' e^{zeta}
          quarter * sv / sqrt_pi};            // Bi' e^{-zeta}
}

inline AiryQuad asymptotic_negative(double x) {
  const auto& coef = asymptotic_coefficients();
  const double y = -x;
  // zeta - pi/4 in double-double, reduced into [-pi, pi].
  const DoubleDouble y_root = dd_sqrt(y);
  const DoubleDouble zeta = dd_two_thirds * (y_root * y);
  const DoubleDouble phase = reduce_two_pi(zeta - dd_quarter_pi);
  const double c = std::cos(phase.hi) - phase.lo * std::sin(phase.hi);
  const double s = std::sin(phase.hi) + phase.lo * std::cos(phase.hi);
  const double inv_zeta = 1.0 / zeta.hi;
  const double pu = asymptotic_sum<double>(coef.u, inv_zeta, 0, 2, -1);
  const double qu = asymptotic_sum<double>(coef.u, inv_zeta, 1, 2, -1);
  const double pv = asymptotic_sum<double>(coef.v, inv_zeta, 0, 2, -1);
  const double qv = asymptotic_sum<double>(coef.v, inv_zeta, 1, 2, -1);
  const double quarter = std::sqrt(y_root.hi);
  const double sqrt_pi = std::sqrt(std::numbers::pi);
  return {x,
          (c * pu + s * qu) / (sqrt_pi * quarter),
          (-s * pu + c * qu) / (sqrt_pi * quarter),
          quarter * (s * pv - c * qv) / sqrt_pi,
          quarter * (c * pv + s * qv) / sqrt_pi};
}

struct Anchor {
  double ai;
  double aip;
  double bi;
  double bip;
};

inline const std::array<Anchor, anchor_count>& anchors() {
  static const std::array<Anchor, anchor_count> table = [] {
    using L = long double;
    std::array<Anchor, anchor_count> t{};
    const int origin = anchor_count / 2;
    const L h = anchor_spacing;
    auto store = [&](int k, Solution<L> a, Solution<L> b) {
      t[k] = {double(a.y), double(a.yp), double(b.y), double(b.yp)};
    };
    // Outward from the origin: Bi on both sides, Ai on x < 0.
    Solution<L> ai{ai_zero, aip_zero};
    Solution<L> bi{bi_zero, bip_zero};
    store(origin, ai, bi);
    for (int k = origin; k > 0; --k) {
      const L x0 = L(k - origin) * h;
      ai = taylor_step<L>(x0, ai, -h);
      bi = taylor_step<L>(x0, bi, -h);
      store(k - 1, ai, bi);
    }
    bi = {bi_zero, bip_zero};
    for (int k = origin; k + 1 < anchor_count; ++k) {
      const L x0 = L(k - origin) * h;
      bi = taylor_step<L>(x0, bi, h);
      t[k + 1].bi = double(bi.y);
      t[k + 1].bip = double(bi.yp);
    }
    // Ai on x > 0 is recessive: start at x = 12 and step toward the origin.
    const L start = 12;
    const auto scaled = asymptotic_positive_scaled<L>(start);
    const L damp = std::exp(-L(2) / L(3) * start * std::sqrt(start));
    Solution<L> rec{scaled[0] * damp, scaled[2] * damp};
    L x0 = start;
    for (int k = anchor_count - 1; k > origin; --k) {
      const L target = L(k - origin) * h;
      while (x0 > target + h / 2) {
        rec = taylor_step<L>(x0, rec, -h);
        x0 -= h;
      }
      t[k].ai = double(rec.y);
      t[k].aip = double(rec.yp);
    }
    return t;
  }();
  return table;
}

inline AiryQuad taylor_eval(double x) {
  const auto& table = anchors();
  const int k = static_cast<int>(std::lround((x + anchor_reach) / anchor_spacing));
  const double x0 = -anchor_reach + anchor_spacing * k;
  const double d = x - x0;
  const Anchor& a = table[static_cast<std::size_t>(k)];
  const auto ai = taylor_step<double>(x0, {a.ai, a.aip}, d);
  const auto bi = taylor_step<double>(x0, {a.bi, a.bip}, d);
  return {x, ai.y, bi.y, ai.yp, bi.yp};
}

inline double zeta_of(double x) { return 2.0 / 3.0 * x * std::sqrt(x); }

inline void require_finite(double x, const char* who) {
  if (!std::isfinite(x)) {
    throw std::domain_error(std::string(who) + ": non-finite argument");
  }
}

}  // namespace detail

/// Ai, Bi, Ai', Bi' at x. Throws std::overflow_error for x > 25, where the
/// scaled variant must be used.
inline AiryQuad airy_eval(double x) {
  detail::require_finite(x, "airy_eval");
  if (x > 25.0) {
    throw std::overflow_error("airy_eval: x = " + std::to_string(x) +
                              " > 25, use airy_eval_scaled");
  }
  if (std::abs(x) <= detail::anchor_reach) return detail::taylor_eval(x);
  if (x < 0.0) return detail::asymptotic_negative(x);
  const auto s = detail::asymptotic_positive_scaled<double>(x);
  const double zeta = detail::zeta_of(x);
  const double down = std::exp(-zeta);
  const double up = std::exp(zeta);
  return {x, s[0] * down, s[1] * up, s[2] * down, s[3] * up};
}

inline ScaledAiryQuad airy_eval_scaled(double x) {
  detail::require_finite(x, "airy_eval_scaled");
  if (x <= 0.0) {
    const AiryQuad q = airy_eval(x);
    return {x, q.ai, q.bi, q.aip, q.bip, 0.0};
  }
  const double zeta = detail::zeta_of(x);
  if (x <= detail::anchor_reach) {
    const AiryQuad q = detail::taylor_eval(x);
    const double up = std::exp(zeta);
    const double down = std::exp(-zeta);
    return {x, q.ai * up, q.bi * down, q.aip * up, q.bip * down, zeta};
  }
  const auto s = detail::asymptotic_positive_scaled<double>(x);
  return {x, s[0], s[1], s[2], s[3], zeta};
}

inline PairQuad fundamental_pair(double x) {
  const AiryQuad q = airy_eval(x);
  constexpr double pi = std::numbers::pi;
  const double ai0 = double(detail::ai_zero);
  const double aip0 = double(detail::aip_zero);
  const double bi0 = double(detail::bi_zero);
  const double bip0 = double(detail::bip_zero);
  return {x,
          pi * (bip0 * q.ai - aip0 * q.bi),
          pi * (ai0 * q.bi - bi0 * q.ai),
          pi * (bip0 * q.aip - aip0 * q.bip),
          pi * (ai0 * q.bip - bi0 * q.aip)};
}

namespace detail {

inline double compute_kappa0(double step) {
  auto vp = [](double x) { return fundamental_pair(x).vp; };
  return -largest_root_below(vp, 0.0, step, -25.0);
}

}  // namespace detail

/// Validity threshold of the closed IDS/DOS formulas: the negated largest
/// zero of V', i.e. the lattice constant at which the upper edge of band 0
/// reaches the cusp energy e = 0.
inline double kappa0() {
  static const double value = detail::compute_kappa0(0.05);
  return value;
}

}  // namespace sawtooth
