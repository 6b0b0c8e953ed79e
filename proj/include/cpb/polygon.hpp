#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "cpb/errors.hpp"
#include "cpb/geometry.hpp"

namespace cpb {

inline constexpr double kTolClosure = 1e-10;

template <class Real>
struct Arc {
  Vec2<Real> center;
  Real radius{};
  Real a{};  // start angle
  Real b{};  // end angle, b > a

  Real central_angle() const { return b - a; }
  Vec2<Real> node_begin() const { return center + radius * unit_dir(a); }
  Vec2<Real> node_end() const { return center + radius * unit_dir(b); }
};

template <class Real>
struct RationalStructure {
  Real delta{};                 // gcd of the central angles
  std::vector<long long> m;     // multiplicities, delta_j = m_j * delta
  long long M{};                // sum of multiplicities, M * delta = 2*pi
};

// A closed strictly convex C^1 curve made of k >= 4 circular arcs with
// pairwise different consecutive radii. Arcs are stored with an unreduced
// angle ladder a_1 < b_1 = a_2 < ... < b_k = a_1 + 2*pi; angles are reduced
// mod 2*pi only at lookup.
template <class Real>
class CircularPolygon {
 public:
  static CircularPolygon from_arcs(std::vector<Arc<Real>> arcs,
                                   Real tol = Real(kTolClosure)) {
    CircularPolygon p;
    p.arcs_ = std::move(arcs);
    p.finish(tol);
    return p;
  }

  int size() const { return static_cast<int>(arcs_.size()); }
  const std::vector<Arc<Real>>& arcs() const { return arcs_; }
  const Arc<Real>& arc(int j) const { return arcs_[mod_k(j)]; }

  Real radius(int j) const { return arcs_[mod_k(j)].radius; }
  Real central_angle(int j) const { return arcs_[mod_k(j)].central_angle(); }
  Real singularity(int j) const {  // a_j of the unreduced ladder, j mod k
    const int k = size();
    const int m = mod_k(j);
    const Real turns = std::floor(Real(j - m) / Real(k) + Real(0.5));
    return arcs_[m].a + turns * 2 * pi_v<Real>();
  }
  Real mu(int j) const { return mu_[mod_k(j)]; }
  Real total_length() const { return total_length_; }
  Real max_radius() const { return max_radius_; }
  Real phi_origin() const { return arcs_[0].a; }

  // Right-continuous: phi == a_j belongs to arc j.
  int arc_index(Real phi) const {
    const Real t = wrap(phi);
    int lo = 0, hi = size() - 1;
    while (lo < hi) {
      const int mid = (lo + hi + 1) / 2;
      if (t >= arcs_[mid].a)
        lo = mid;
      else
        hi = mid - 1;
    }
    return lo;
  }

  Vec2<Real> point_at(Real phi) const {
    const Real t = wrap(phi);
    const Arc<Real>& g = arcs_[arc_index(phi)];
    return g.center + g.radius * unit_dir(t);
  }

  // Unit tangent of the counter-clockwise parametrisation; continuous at
  // the nodes.
  Vec2<Real> tangent_at(Real phi) const {
    const Real t = wrap(phi);
    return {-std::sin(t), std::cos(t)};
  }

  Real wrap(Real phi) const { return reduce_angle(phi, arcs_[0].a); }

  // S(xi) = sum_j delta_j r_j^xi. S(1) is the perimeter, S(0) = 2*pi and
  // S(1/3) is the curvature integral int kappa^(2/3) ds.
  Real curvature_functional(Real xi) const {
    Real s = 0;
    for (const auto& g : arcs_) s += g.central_angle() * std::pow(g.radius, xi);
    return s;
  }

  std::optional<RationalStructure<Real>> rational_structure(
      Real tol_rational = Real(1e-9),
      std::int64_t max_denominator = 1000000) const {
    const Real two_pi = 2 * pi_v<Real>();
    std::vector<std::pair<std::int64_t, std::int64_t>> fracs;
    std::int64_t common_den = 1;
    for (const auto& g : arcs_) {
      const auto frac = rationalize(Real(g.central_angle() / two_pi),
                                    tol_rational, max_denominator);
      if (!frac) return std::nullopt;
      const std::int64_t mult = frac->second / std::gcd(common_den, frac->second);
      if (common_den > (std::int64_t(1) << 56) / mult) return std::nullopt;
      common_den *= mult;
      fracs.push_back(*frac);
    }
    std::int64_t g = 0;
    std::vector<std::int64_t> num(arcs_.size());
    for (std::size_t j = 0; j < arcs_.size(); ++j) {
      num[j] = fracs[j].first * (common_den / fracs[j].second);
      g = std::gcd(g, num[j]);
    }
    RationalStructure<Real> rs;
    rs.delta = two_pi * Real(g) / Real(common_den);
    rs.M = 0;
    rs.m.resize(arcs_.size());
    for (std::size_t j = 0; j < arcs_.size(); ++j) {
      rs.m[j] = num[j] / g;
      rs.M += rs.m[j];
      if (std::fabs(arcs_[j].central_angle() - Real(rs.m[j]) * rs.delta) >
          tol_rational)
        return std::nullopt;
    }
    return rs;
  }

  // Arc order reversal (mirror across the x-axis), turning clockwise sliding
  // orbits of the original into counter-clockwise ones of the result.
  CircularPolygon reversed() const {
    const int k = size();
    std::vector<Arc<Real>> rev(k);
    for (int j = 0; j < k; ++j) {
      const Arc<Real>& g = arcs_[k - 1 - j];
      rev[j].center = {g.center.x, -g.center.y};
      rev[j].radius = g.radius;
      rev[j].a = -g.b;
      rev[j].b = -g.a;
    }
    return from_arcs(std::move(rev));
  }

 private:
  int mod_k(int j) const {
    const int k = size();
    int m = j % k;
    return m < 0 ? m + k : m;
  }

  static std::optional<std::pair<std::int64_t, std::int64_t>> rationalize(
      Real x, Real tol, std::int64_t max_den) {
    // Continued-fraction convergents of x with bounded denominator. A
    // convergent p/q is accepted only when it matches x to within rounding
    // noise or to tol/q^2; merely good approximations of irrational ratios
    // fail this and the input is reported as not rational.
    std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    Real r = x;
    for (int it = 0; it < 64; ++it) {
      const Real fl = std::floor(r);
      if (fl > Real(std::numeric_limits<std::int64_t>::max() / 4)) break;
      const std::int64_t ai = static_cast<std::int64_t>(fl);
      const std::int64_t p2 = ai * p1 + p0;
      const std::int64_t q2 = ai * q1 + q0;
      if (q2 > max_den) break;
      p0 = p1;
      q0 = q1;
      p1 = p2;
      q1 = q2;
      const Real accept = std::max(
          64 * std::numeric_limits<Real>::epsilon() * std::max<Real>(1, x),
          tol / (Real(q1) * Real(q1)));
      if (std::fabs(x - Real(p1) / Real(q1)) <= accept) {
        if (p1 <= 0 || q1 <= 0) return std::nullopt;
        return std::make_pair(p1, q1);
      }
      const Real frac = r - fl;
      if (frac < std::numeric_limits<Real>::epsilon()) break;
      r = 1 / frac;
    }
    return std::nullopt;
  }

  void finish(Real tol) {
    const int k = size();
    if (k < 4) throw InvalidArcCount("circular polygon needs k >= 4 arcs, got " +
                                     std::to_string(k));
    const Real two_pi = 2 * pi_v<Real>();
    Real sum_delta = 0;
    Vec2<Real> closure{0, 0};
    max_radius_ = 0;
    total_length_ = 0;
    for (int j = 0; j < k; ++j) {
      const Arc<Real>& g = arcs_[j];
      if (!(g.radius > 0))
        throw InvalidParameter("arc radius must be positive");
      const Real d = g.central_angle();
      if (!(d > 0) || !(d < two_pi))
        throw InvalidParameter("central angle must lie in (0, 2*pi)");
      sum_delta += d;
      closure += g.radius * (unit_dir(g.b) - unit_dir(g.a));
      max_radius_ = std::max(max_radius_, g.radius);
      total_length_ += d * g.radius;
      const Arc<Real>& h = arcs_[(j + 1) % k];
      if (std::fabs(g.radius - h.radius) <=
          Real(1e-9) * std::max(g.radius, h.radius))
        throw EqualConsecutiveRadii("arcs " + std::to_string(j + 1) + " and " +
                                    std::to_string(j + 2) +
                                    " have equal radii");
      // C^1 ladder: b_j = a_{j+1} (b_k = a_1 + 2*pi)
      const Real next_a = (j + 1 < k) ? h.a : h.a + two_pi;
      if (std::fabs(g.b - next_a) > tol)
        throw ClosureViolation("angular ranges do not concatenate: b_" +
                               std::to_string(j + 1) + " != a_" +
                               std::to_string(j + 2));
      const Vec2<Real> node_gap = g.node_end() - h.node_begin();
      if (node_gap.norm() > tol * std::max<Real>(1, max_radius_))
        throw ClosureViolation("node mismatch between arcs " +
                               std::to_string(j + 1) + " and " +
                               std::to_string(j + 2));
    }
    if (std::fabs(sum_delta - two_pi) > tol)
      throw ClosureViolation("central angles sum to " +
                             std::to_string(double(sum_delta)) +
                             ", expected 2*pi");
    if (closure.norm() > tol * std::max<Real>(1, max_radius_))
      throw ClosureViolation("sum r_j (e^{i b_j} - e^{i a_j}) != 0, residual " +
                             std::to_string(double(closure.norm())));
    mu_.resize(k);
    for (int j = 0; j < k; ++j)
      mu_[j] = std::sqrt(arcs_[j].radius / arcs_[(j + 1) % k].radius);
  }

  std::vector<Arc<Real>> arcs_;
  std::vector<Real> mu_;
  Real total_length_{};
  Real max_radius_{};
};

// Centers are placed recursively from O_1 by O_{j+1} = O_j +
// (r_j - r_{j+1}) e^{i b_j}; closure of the last node is then a consequence
// of sum r_j w_j = 0, which is validated.
template <class Real>
CircularPolygon<Real> build_polygon(const std::vector<Real>& radii,
                                    const std::vector<Real>& central_angles,
                                    Vec2<Real> O1 = {0, 0}, Real a1 = 0) {
  const int k = static_cast<int>(radii.size());
  if (k < 4) throw InvalidArcCount("need at least 4 arcs, got " +
                                   std::to_string(k));
  if (central_angles.size() != radii.size())
    throw InvalidParameter("radii and central_angles must have equal length");
  std::vector<Arc<Real>> arcs(k);
  Vec2<Real> O = O1;
  Real a = a1;
  for (int j = 0; j < k; ++j) {
    arcs[j].center = O;
    arcs[j].radius = radii[j];
    arcs[j].a = a;
    arcs[j].b = a + central_angles[j];
    if (j + 1 < k) O = O + (radii[j] - radii[j + 1]) * unit_dir(arcs[j].b);
    a = arcs[j].b;
  }
  return CircularPolygon<Real>::from_arcs(std::move(arcs));
}

// Pseudo-ellipse E_{alpha,r,R}: radii (r, R, r, R) and central angles
// (alpha, pi - alpha, alpha, pi - alpha). alpha = pi/2 gives the squared
// pseudo-ellipse.
template <class Real>
CircularPolygon<Real> pseudo_ellipse(Real alpha, Real r, Real R,
                                     Vec2<Real> O1 = {0, 0}, Real a1 = 0) {
  if (!(alpha > 0) || !(alpha < pi_v<Real>()))
    throw InvalidParameter("pseudo-ellipse needs 0 < alpha < pi");
  if (!(r > 0) || !(r < R))
    throw InvalidParameter("pseudo-ellipse needs 0 < r < R");
  const Real pi = pi_v<Real>();
  return build_polygon<Real>({r, R, r, R}, {alpha, pi - alpha, alpha, pi - alpha},
                             O1, a1);
}

// Moss's egg of radius r: radii (r, 2r, (2 - sqrt(2)) r, 2r), central angles
// (pi, pi/4, pi/2, pi/4).
template <class Real>
CircularPolygon<Real> moss_egg(Real r, Vec2<Real> O1 = {0, 0}, Real a1 = 0) {
  if (!(r > 0)) throw InvalidParameter("moss egg needs r > 0");
  const Real pi = pi_v<Real>();
  const Real s2 = std::sqrt(Real(2));
  return build_polygon<Real>({r, 2 * r, (2 - s2) * r, 2 * r},
                             {pi, pi / 4, pi / 2, pi / 4}, O1, a1);
}

// Parallel circular 6-gon built on a triangle with clockwise vertices
// A, B, C: centers (A, B, C, A, B, C), central angles equal to the internal
// angles, and radii determined by the first one. Requires
// r > max{0, a - c, a - b} with a, b, c the side lengths.
template <class Real>
CircularPolygon<Real> triangle_sixgon(Vec2<Real> A, Vec2<Real> B, Vec2<Real> C,
                                      Real r) {
  const Real la = (C - B).norm();  // side opposite A
  const Real lb = (A - C).norm();
  const Real lc = (B - A).norm();
  if ((B - A).cross(C - B) >= 0)
    throw InvalidParameter("triangle vertices must be ordered clockwise");
  if (!(r > std::max<Real>({Real(0), la - lc, la - lb})))
    throw InvalidParameter("sixgon radius must exceed max{0, a-c, a-b}");
  auto angle_at = [](Vec2<Real> P, Vec2<Real> Q, Vec2<Real> S) {
    const Vec2<Real> u = Q - P, v = S - P;
    return std::acos(std::clamp<Real>(u.dot(v) / (u.norm() * v.norm()),
                                      Real(-1), Real(1)));
  };
  const Real alpha = angle_at(A, B, C);
  const Real beta = angle_at(B, C, A);
  const Real gamma = angle_at(C, A, B);
  const std::vector<Real> radii = {r,          r + lc,      r + lc - la,
                                   r + lc - la + lb, r + lb - la, r + lb};
  const std::vector<Real> angles = {alpha, beta, gamma, alpha, beta, gamma};
  // First tangent direction follows from O_2 = O_1 + (r_1 - r_2) e^{i b_1}
  // with O_1 = A, O_2 = B, r_1 - r_2 = -lc.
  const Vec2<Real> d = A - B;
  const Real b1 = std::atan2(d.y, d.x);
  return build_polygon<Real>(radii, angles, A, b1 - alpha);
}

}  // namespace cpb
