#pragma once

// Arbitrary-precision Airy values from the Maclaurin series, used as ground
// truth by the test suites. Accuracy is relative to the local magnitude of the
// functions (the modulus envelope on x < 0, where Ai and Bi have zeros).

#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/mpfr.hpp>

namespace sawtooth::oracle {

using Real = boost::multiprecision::mpfr_float;

struct ReferenceAiry {
  Real ai;
  Real bi;
  Real aip;
  Real bip;
  unsigned digits = 0;
};

namespace detail {

class ScopedPrecision {
 public:
  explicit ScopedPrecision(unsigned digits10) : saved_(Real::default_precision()) {
    Real::default_precision(digits10);
  }
  ~ScopedPrecision() { Real::default_precision(saved_); }
  ScopedPrecision(const ScopedPrecision&) = delete;
  ScopedPrecision& operator=(const ScopedPrecision&) = delete;

 private:
  unsigned saved_;
};

}  // namespace detail

/// Ai, Bi, Ai', Bi' at x to `digits` significant decimal digits.
/// Requires |x| <= 30 and digits <= 50.
inline ReferenceAiry reference_airy(double x, unsigned digits) {
  if (!(std::abs(x) <= 30.0)) throw std::domain_error("reference_airy: |x| > 30");
  if (digits == 0 || digits > 50) throw std::domain_error("reference_airy: digits not in [1, 50]");

  // Series terms reach e^{zeta}; the result can be as small as e^{-zeta}.
  const double zeta = 2.0 / 3.0 * std::pow(std::abs(x), 1.5);
  const unsigned cancellation = static_cast<unsigned>(std::ceil(2.0 * zeta / std::log(10.0)));
  const unsigned working = digits + cancellation + 20;
  detail::ScopedPrecision guard(working);

  const Real xr = x;
  const Real three = 3;
  const Real c1 = 1 / (pow(three, Real(2) / 3) * tgamma(Real(2) / 3));  // Ai(0)
  const Real c2 = 1 / (pow(three, Real(1) / 3) * tgamma(Real(1) / 3));  // -Ai'(0)

  Real f = 1, fp = 0, g = xr, gp = 1;
  Real f_term = 1;  // x^{3k} a_k
  Real g_term = 1;  // x^{3k} b_k, so g_k = x * g_term
  const Real cube = xr * xr * xr;
  const Real threshold = pow(Real(10), -static_cast<int>(working - 5));
  Real max_term = 1;
  bool done = x == 0.0;
  for (long k = 1; !done; ++k) {
    if (k > 100000) throw std::runtime_error("reference_airy: iteration cap reached");
    const Real kk = k;
    f_term *= cube / ((3 * kk - 1) * (3 * kk));
    g_term *= cube / ((3 * kk) * (3 * kk + 1));
    const Real df = f_term * (3 * kk) / xr;
    const Real dg = g_term * (3 * kk + 1);
    f += f_term;
    fp += df;
    g += g_term * xr;
    gp += dg;
    const Real size = abs(f_term) + abs(df) + abs(g_term * xr) + abs(dg);
    if (size > max_term) max_term = size;
    // Ratios fall below 1/2 once 9k^2 > 2|x|^3, after which the tail is
    // bounded by the current terms.
    if (9.0 * double(k) * double(k) > 2.0 * std::abs(x * x * x) && size < threshold * max_term) {
      done = true;
    }
  }

  ReferenceAiry out;
  out.digits = digits;
  const Real sqrt3 = sqrt(three);
  out.ai = c1 * f - c2 * g;
  out.aip = c1 * fp - c2 * gp;
  out.bi = sqrt3 * (c1 * f + c2 * g);
  out.bip = sqrt3 * (c1 * fp + c2 * gp);

  const Real wronskian = out.ai * out.bip - out.aip * out.bi;
  const Real pi_value = boost::math::constants::pi<Real>();
  if (abs(wronskian * pi_value - 1) > pow(Real(10), -static_cast<int>(digits))) {
    throw std::runtime_error("reference_airy: requested precision not achieved at x = " +
                             std::to_string(x));
  }
  return out;
}

}  // namespace sawtooth::oracle
