#pragma once

// Planar vector primitives shared by the controller, the avoidance
// strategies and the metric pipeline. Everything is double precision.

#include <cmath>

namespace ringswarm {

/// Tolerance for "is zero" comparisons unless a caller overrides it.
inline constexpr double kZeroTol = 1e-12;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 &operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2 &operator-=(Vec2 o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr Vec2 &operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }

  friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
constexpr Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double norm_sq(Vec2 a) { return dot(a, a); }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

inline bool is_finite(Vec2 a) { return std::isfinite(a.x) && std::isfinite(a.y); }

/// z component of the 3D cross product of two in-plane vectors.
constexpr double crossz(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

/// Counterclockwise quarter turn.
constexpr Vec2 rot90(Vec2 a) { return {-a.y, a.x}; }

/// Sign function with sgnz(0) = +1, so a perfect head-on encounter steers left.
constexpr double sgnz(double x) { return x < 0.0 ? -1.0 : 1.0; }

/// Scales x down to magnitude a when ||x|| >= a; identity otherwise.
inline Vec2 clip(Vec2 x, double a) {
  const double n = norm(x);
  if (n < a) return x;
  if (n == 0.0) return {};
  return (a / n) * x;
}

/// Unit vector, or the zero vector when ||a|| <= tol.
inline Vec2 normalized(Vec2 a, double tol = kZeroTol) {
  const double n = norm(a);
  return n > tol ? a / n : Vec2{};
}

}  // namespace ringswarm
