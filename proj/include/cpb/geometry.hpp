#pragma once

#include <cmath>
#include <limits>

#include "cpb/errors.hpp"

namespace cpb {

template <class Real>
struct Vec2 {
  Real x{}, y{};

  Vec2() = default;
  Vec2(Real x_, Real y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& v) const { return {x + v.x, y + v.y}; }
  Vec2 operator-(const Vec2& v) const { return {x - v.x, y - v.y}; }
  Vec2 operator*(Real s) const { return {x * s, y * s}; }
  Vec2 operator/(Real s) const { return {x / s, y / s}; }
  Vec2& operator+=(const Vec2& v) {
    x += v.x;
    y += v.y;
    return *this;
  }

  Real dot(const Vec2& v) const { return x * v.x + y * v.y; }
  Real cross(const Vec2& v) const { return x * v.y - y * v.x; }
  Real norm() const { return std::hypot(x, y); }
  Real norm2() const { return x * x + y * y; }
};

template <class Real>
Vec2<Real> operator*(Real s, const Vec2<Real>& v) {
  return v * s;
}

template <class Real>
Vec2<Real> unit_dir(Real angle) {
  return {std::cos(angle), std::sin(angle)};
}

template <class Real>
constexpr Real pi_v() {
  return Real(3.14159265358979323846264338327950288L);
}

// Reduce x into [lo, lo + 2*pi).
template <class Real>
Real reduce_angle(Real x, Real lo) {
  const Real two_pi = 2 * pi_v<Real>();
  Real t = std::fmod(x - lo, two_pi);
  if (t < 0) t += two_pi;
  Real r = lo + t;
  if (r >= lo + two_pi) r = lo;  // fmod rounding at the seam
  return r;
}

// Integer bracketing of strict inequalities m > x and m < x. Values that sit
// a hair away from an integer, farther than accumulated rounding can explain
// but closer than the guard band, are refused rather than silently decided.
template <class Real>
long long smallest_int_above(Real x) {
  const Real r = std::nearbyint(x);
  const Real fp_slack = 64 * std::numeric_limits<Real>::epsilon() *
                        std::max<Real>(Real(1), std::fabs(x));
  const Real guard = Real(1e-9);
  const Real d = std::fabs(x - r);
  if (d <= fp_slack) return static_cast<long long>(r) + 1;
  if (d < guard)
    throw GuardBandAmbiguous("value " + std::to_string(static_cast<double>(x)) +
                             " too close to integer for a strict comparison");
  return static_cast<long long>(std::floor(x)) + 1;
}

template <class Real>
long long largest_int_below(Real x) {
  const Real r = std::nearbyint(x);
  const Real fp_slack = 64 * std::numeric_limits<Real>::epsilon() *
                        std::max<Real>(Real(1), std::fabs(x));
  const Real guard = Real(1e-9);
  const Real d = std::fabs(x - r);
  if (d <= fp_slack) return static_cast<long long>(r) - 1;
  if (d < guard)
    throw GuardBandAmbiguous("value " + std::to_string(static_cast<double>(x)) +
                             " too close to integer for a strict comparison");
  return static_cast<long long>(std::ceil(x)) - 1;
}

// Non-strict versions: m >= x and m <= x.
template <class Real>
long long smallest_int_at_least(Real x) {
  const Real r = std::nearbyint(x);
  const Real fp_slack = 64 * std::numeric_limits<Real>::epsilon() *
                        std::max<Real>(Real(1), std::fabs(x));
  if (std::fabs(x - r) <= fp_slack) return static_cast<long long>(r);
  return static_cast<long long>(std::ceil(x));
}

template <class Real>
long long largest_int_at_most(Real x) {
  const Real r = std::nearbyint(x);
  const Real fp_slack = 64 * std::numeric_limits<Real>::epsilon() *
                        std::max<Real>(Real(1), std::fabs(x));
  if (std::fabs(x - r) <= fp_slack) return static_cast<long long>(r);
  return static_cast<long long>(std::floor(x));
}

}  // namespace cpb
