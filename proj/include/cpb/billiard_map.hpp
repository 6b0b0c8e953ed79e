#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "cpb/errors.hpp"
#include "cpb/geometry.hpp"
#include "cpb/polygon.hpp"

namespace cpb {

inline constexpr double kTolNode = 1e-11;   // node-impact snap, in phi
inline constexpr double kTolRange = 1e-12;  // angular-range slack for raycasts
inline constexpr double kTolChordRel = 1e-13;

template <class Real>
struct PhasePoint {
  Real phi{};    // reduced into [a_1, a_1 + 2*pi)
  Real theta{};  // in [0, pi]
};

template <class Real>
struct StepRecord {
  PhasePoint<Real> pre;
  PhasePoint<Real> post;
  int arc_from{};
  int arc_to{};
  int crossed_nodes{};   // singularities a_m touched or passed by this link
  Real link_length{};
  Real advance{};        // unreduced phi increase along the step (>= 0)
};

// g(theta; mu) = acos((1 - mu^2) + mu^2 cos theta): the reflection angle
// after a link that crosses a node perpendicularly to its normal.
// Evaluated as 2 asin(mu sin(theta/2)), the same function without the
// cancellation near theta = 0.
template <class Real>
Real hubacher_angle(Real theta, Real mu) {
  const Real u = mu * std::sin(theta / 2);
  if (u < Real(-1) || u > Real(1))
    throw DomainError("hubacher_angle: acos argument " +
                      std::to_string(double(1 - 2 * u * u)) +
                      " outside [-1, 1]");
  return 2 * std::asin(u);
}

// Leading-order transition factor: theta_bar = Omega(s) theta + O(theta^3),
// s the normalized offset of the crossing link in [-1, 1].
template <class Real>
Real transition_factor(Real s, Real mu) {
  return std::sqrt(mu * mu + (1 - mu * mu) * s * s);
}

namespace detail {

// First intersection of the ray z + s*d, s > s_min, with the boundary.
// Walks arcs counter-clockwise starting at arc j0; the exit point of a chord
// of a convex curve is unique, so the walk stops at the first in-range hit.
template <class Real>
struct RayHit {
  Real s{};         // ray parameter (chord length, d is unit)
  Real phi{};       // unreduced angle in [a_{j0}, a_{j0} + 2*pi + delta]
  int arc{};        // arc index mod k
  int arcs_ahead{}; // how many arcs past j0 the hit landed on
};

template <class Real>
RayHit<Real> cast_ray(const CircularPolygon<Real>& poly, Vec2<Real> z,
                      Vec2<Real> d, int j0, Real start_off, Real s_min) {
  const int k = poly.size();
  for (int step = 0; step <= k + 1; ++step) {
    const Arc<Real>& g = poly.arc(j0 + step);
    const Vec2<Real> f = z - g.center;
    const Real B = d.dot(f);
    const Real C = f.norm2() - g.radius * g.radius;
    const Real disc = B * B - C;
    if (disc < 0) continue;
    const Real sq = std::sqrt(disc);
    const Real a_lift = poly.singularity(j0 + step);
    const Real delta = poly.central_angle(j0 + step);
    const Real two_pi = 2 * pi_v<Real>();
    Real best = -1, best_phi = 0;
    for (const Real s : {-B - sq, -B + sq}) {
      if (s <= s_min) continue;
      const Vec2<Real> w = z + s * d - g.center;
      Real off = std::fmod(std::atan2(w.y, w.x) - a_lift, two_pi);
      if (off < 0) off += two_pi;
      // a hit on the starting arc behind the start point belongs to the
      // walk's last arc (full revolution), not to this one
      if (step == 0 && off <= start_off) continue;
      Real cand;
      if (off <= delta + Real(kTolRange))
        cand = a_lift + std::min(off, delta);
      else if (off >= two_pi - Real(kTolRange))
        cand = a_lift;
      else
        continue;
      if (best < 0 || s < best) {
        best = s;
        best_phi = cand;
      }
    }
    if (best > 0) {
      RayHit<Real> hit;
      hit.s = best;
      hit.phi = best_phi;
      hit.arc = (j0 + step) % k;
      hit.arcs_ahead = step;
      return hit;
    }
  }
  throw NoIntersection("ray left the boundary without a second intersection");
}

}  // namespace detail

template <class Real>
bool on_theta_boundary(const PhasePoint<Real>& x) {
  return x.theta <= Real(0) || x.theta >= pi_v<Real>();
}

template <class Real>
StepRecord<Real> billiard_step(const CircularPolygon<Real>& poly,
                               const PhasePoint<Real>& x) {
  StepRecord<Real> rec;
  rec.pre = {poly.wrap(x.phi), x.theta};
  if (x.theta < 0 || x.theta > pi_v<Real>())
    throw InvalidParameter("theta outside [0, pi]");
  const int j = poly.arc_index(rec.pre.phi);
  rec.arc_from = j;
  if (on_theta_boundary(x)) {  // f(phi, 0) = (phi, 0), f(phi, pi) = (phi, pi)
    rec.post = rec.pre;
    rec.arc_to = j;
    rec.link_length = 0;
    rec.advance = 0;
    return rec;
  }

  const Real a_lift = poly.singularity(j);
  const Real phi = a_lift + (rec.pre.phi - poly.arc(j).a);  // lifted
  const Real b_lift = a_lift + poly.central_angle(j);
  const Real phi2 = phi + 2 * x.theta;
  if (phi2 <= b_lift + Real(kTolNode)) {
    // consecutive impacts on one arc: exact circular dynamics, theta is
    // preserved bit for bit
    rec.post = {poly.wrap(phi2), x.theta};
    rec.arc_to = poly.arc_index(rec.post.phi);
    rec.link_length = 2 * poly.arc(j).radius * std::sin(x.theta);
    rec.advance = 2 * x.theta;
    rec.crossed_nodes = (phi2 >= b_lift - Real(kTolNode)) ? 1 : 0;
    return rec;
  }

  const Vec2<Real> z = poly.point_at(phi);
  const Vec2<Real> t = poly.tangent_at(phi);
  const Vec2<Real> d = {t.x * std::cos(x.theta) - t.y * std::sin(x.theta),
                        t.x * std::sin(x.theta) + t.y * std::cos(x.theta)};
  const Real tol_chord = Real(kTolChordRel) * poly.max_radius();
  const auto hit =
      detail::cast_ray(poly, z, d, j, phi - a_lift, tol_chord);
  if (hit.s <= tol_chord)
    throw DegenerateChord("chord length " + std::to_string(double(hit.s)) +
                          " below tolerance away from the theta boundary");
  const Vec2<Real> tb = poly.tangent_at(hit.phi);
  Real theta_bar = std::atan2(d.cross(tb), d.dot(tb));
  if (theta_bar < 0) theta_bar = 0;
  if (theta_bar > pi_v<Real>()) theta_bar = pi_v<Real>();
  rec.post = {poly.wrap(hit.phi), theta_bar};
  rec.arc_to = hit.arc;
  rec.link_length = hit.s;
  rec.advance = hit.phi - phi;
  rec.crossed_nodes = hit.arcs_ahead;  // singularities passed by the link
  return rec;
}

template <class Real>
PhasePoint<Real> involution(const PhasePoint<Real>& x) {
  return {x.phi, pi_v<Real>() - x.theta};
}

// f^{-1} = I o f o I with I(phi, theta) = (phi, pi - theta). Backward steps
// that stay on one arc take the exact circular closed form directly, so
// theta is preserved bit for bit just like in the forward direction.
template <class Real>
StepRecord<Real> billiard_inverse(const CircularPolygon<Real>& poly,
                                  const PhasePoint<Real>& x) {
  const Real phi = poly.wrap(x.phi);
  if (!on_theta_boundary(x)) {
    const int j = poly.arc_index(phi);
    const Real phi_back = phi - 2 * x.theta;
    if (phi_back >= poly.arc(j).a - Real(kTolNode)) {
      StepRecord<Real> rec;
      rec.pre = {phi, x.theta};
      rec.post = {poly.wrap(phi_back), x.theta};
      rec.arc_from = j;
      rec.arc_to = poly.arc_index(rec.post.phi);
      rec.link_length = 2 * poly.arc(j).radius * std::sin(x.theta);
      rec.advance = -2 * x.theta;
      rec.crossed_nodes = (phi_back <= poly.arc(j).a + Real(kTolNode)) ? 1 : 0;
      return rec;
    }
  }
  StepRecord<Real> rec = billiard_step(poly, involution(x));
  std::swap(rec.arc_from, rec.arc_to);
  rec.pre = involution(rec.pre);    // = x
  rec.post = involution(rec.post);  // = f^{-1}(x)
  // the reversed-orbit link advances by 2*pi minus the backward motion
  rec.advance = rec.advance == 0 ? 0 : rec.advance - 2 * pi_v<Real>();
  return rec;
}

// n >= 0 forward steps, n < 0 backward steps.
template <class Real>
std::vector<StepRecord<Real>> iterate(const CircularPolygon<Real>& poly,
                                      PhasePoint<Real> x, long long n) {
  std::vector<StepRecord<Real>> out;
  out.reserve(static_cast<std::size_t>(n < 0 ? -n : n));
  for (long long i = 0; i < (n < 0 ? -n : n); ++i) {
    StepRecord<Real> rec =
        n >= 0 ? billiard_step(poly, x) : billiard_inverse(poly, x);
    x = rec.post;
    out.push_back(rec);
  }
  return out;
}

// Forward n steps without per-step records; consecutive impacts on one arc
// are advanced in a single jump. Returns the final phase point and
// accumulates the unreduced phi advance if requested.
template <class Real>
PhasePoint<Real> advance_steps(const CircularPolygon<Real>& poly,
                               PhasePoint<Real> x, long long n,
                               Real* advance_out = nullptr) {
  Real advance = 0;
  long long left = n;
  while (left > 0) {
    if (on_theta_boundary(x)) break;
    const int j = poly.arc_index(x.phi);
    const Real a_lift = poly.singularity(j);
    const Real phi = a_lift + (x.phi - poly.arc(j).a);
    const Real b_lift = a_lift + poly.central_angle(j);
    const Real room = b_lift + Real(kTolNode) - phi;
    long long m = static_cast<long long>(std::floor(room / (2 * x.theta)));
    if (m > left) m = left;
    if (m > 0) {
      const Real jump = 2 * x.theta * Real(m);
      x.phi = poly.wrap(phi + jump);
      advance += jump;
      left -= m;
      continue;
    }
    const StepRecord<Real> rec = billiard_step(poly, x);
    x = rec.post;
    advance += rec.advance;
    --left;
  }
  if (advance_out) *advance_out = advance;
  return x;
}

// Residual of the reflection construction at the pre point: the chord
// measured geometrically should leave the tangent at exactly theta.
template <class Real>
Real reflection_residual(const CircularPolygon<Real>& poly,
                         const StepRecord<Real>& rec) {
  if (rec.link_length == 0) return 0;
  const Vec2<Real> z0 = poly.point_at(rec.pre.phi);
  const Vec2<Real> z1 = poly.point_at(rec.post.phi);
  const Vec2<Real> chord = z1 - z0;
  const Vec2<Real> t = poly.tangent_at(rec.pre.phi);
  const Real ang = std::atan2(t.cross(chord), t.dot(chord));
  return std::fabs(ang - rec.pre.theta);
}

}  // namespace cpb
