#pragma once

#include <cmath>

namespace sawtooth {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

// Row-major 2x2 matrix [[a11, a12], [a21, a22]].
struct Mat2 {
  double a11 = 1.0, a12 = 0.0, a21 = 0.0, a22 = 1.0;

  static Mat2 identity() { return {}; }

  double det() const { return a11 * a22 - a12 * a21; }
  double trace() const { return a11 + a22; }

  // Inverse for unit-determinant matrices; general matrices divide by det.
  Mat2 inverse() const {
    const double d = det();
    return {a22 / d, -a12 / d, -a21 / d, a11 / d};
  }

  Vec2 apply(Vec2 v) const { return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y}; }
};

inline Mat2 operator*(const Mat2& l, const Mat2& r) {
  return {l.a11 * r.a11 + l.a12 * r.a21, l.a11 * r.a12 + l.a12 * r.a22,
          l.a21 * r.a11 + l.a22 * r.a21, l.a21 * r.a12 + l.a22 * r.a22};
}

inline Vec2 operator*(const Mat2& m, Vec2 v) { return m.apply(v); }

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

}  // namespace sawtooth
