#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cpb/counting.hpp"
#include "cpb/errors.hpp"
#include "cpb/orbits.hpp"
#include "cpb/polygon.hpp"

namespace cpb {

// h(y) = -(1/24) sum_j delta_j^3 r_j / y_j^2 on the open simplex; strictly
// concave, with unique maximiser w(1/3).
template <class Real>
Real spectrum_h(const CircularPolygon<Real>& poly,
                const std::vector<Real>& y) {
  Real s = 0;
  for (int j = 0; j < poly.size(); ++j) {
    const Real d = poly.central_angle(j);
    s += d * d * d * poly.radius(j) /
         (y[static_cast<std::size_t>(j)] * y[static_cast<std::size_t>(j)]);
  }
  return -s / 24;
}

template <class Real>
std::vector<Real> spectrum_h_gradient(const CircularPolygon<Real>& poly,
                                      const std::vector<Real>& y) {
  std::vector<Real> g(y.size());
  for (int j = 0; j < poly.size(); ++j) {
    const Real d = poly.central_angle(j);
    g[static_cast<std::size_t>(j)] =
        d * d * d * poly.radius(j) /
        (12 * y[static_cast<std::size_t>(j)] * y[static_cast<std::size_t>(j)] *
         y[static_cast<std::size_t>(j)]);
  }
  return g;
}

// Normalised weight vector w(xi) with components delta_j r_j^xi / S(xi).
template <class Real>
std::vector<Real> spectrum_weights(const CircularPolygon<Real>& poly,
                                   Real xi) {
  std::vector<Real> w(static_cast<std::size_t>(poly.size()));
  const Real S = poly.curvature_functional(xi);
  for (int j = 0; j < poly.size(); ++j)
    w[static_cast<std::size_t>(j)] =
        poly.central_angle(j) * std::pow(poly.radius(j), xi) / S;
  return w;
}

template <class Real>
struct SpectrumInterval {
  Real c1_minus{}, c1_plus{};
  std::vector<Real> argmax;        // w(1/3)
  std::vector<Real> vertex_argmin;  // vertex of the closed limit polytope
};

// c1_plus = -S(1/3)^3/24 in closed form; c1_minus as the minimum of the
// concave h over the vertices of the closed limit polytope.
template <class Real>
SpectrumInterval<Real> spectrum_interval(const CircularPolygon<Real>& poly) {
  SpectrumInterval<Real> out;
  const Real S13 = poly.curvature_functional(Real(1) / 3);
  out.c1_plus = -S13 * S13 * S13 / 24;
  out.argmax = spectrum_weights(poly, Real(1) / 3);

  const auto sp = SymbolicParams::from_polygon_geometric(
      CircularPolygon<double>::from_arcs([&] {
        std::vector<Arc<double>> arcs;
        for (const auto& g : poly.arcs())
          arcs.push_back({{double(g.center.x), double(g.center.y)},
                          double(g.radius), double(g.a), double(g.b)});
        return arcs;
      }()));
  const auto K = limit_polytope(sp, 1);
  const auto verts = enumerate_vertices(K);
  if (verts.empty()) throw DegeneratePolytope("limit polytope has no vertices");
  Real best = std::numeric_limits<Real>::infinity();
  for (const auto& v : verts) {
    std::vector<Real> y(static_cast<std::size_t>(poly.size()));
    Real s = 0;
    for (int j = 0; j + 1 < poly.size(); ++j) {
      y[static_cast<std::size_t>(j)] = Real(v[static_cast<std::size_t>(j)]);
      s += y[static_cast<std::size_t>(j)];
    }
    y[static_cast<std::size_t>(poly.size() - 1)] = 1 - s;
    if (y.back() <= 0) throw DegeneratePolytope("vertex leaves the simplex");
    const Real h = spectrum_h(poly, y);
    if (h < best) {
      best = h;
      out.vertex_argmin = y;
    }
  }
  out.c1_minus = best;
  const Real nodal = -pi_v<Real>() * pi_v<Real>() * poly.total_length() / 6;
  if (!(out.c1_minus <= nodal + Real(1e-9)) || !(nodal < out.c1_plus) ||
      !(out.c1_plus < 0))
    throw BoundViolation("spectrum interval ordering violated");
  return out;
}

// The smooth-oval asymptotic constant shares the closed form of c1_plus.
template <class Real>
Real marvizi_melrose_c1(const CircularPolygon<Real>& poly) {
  const Real S13 = poly.curvature_functional(Real(1) / 3);
  return -S13 * S13 * S13 / 24;
}

// --- per-arc decomposition of a sliding (1,q)-periodic orbit ---------------

template <class Real>
struct LengthDecomposition {
  std::vector<long long> impacts_per_arc;
  std::vector<Real> psi;        // constant reflection angle per arc
  std::vector<Real> phi_minus;  // entry offset from a_j
  std::vector<Real> phi_plus;   // exit offset from b_j
  std::vector<Real> ell;        // circular link length 2 r sin psi
  std::vector<Real> ell_minus, ell_plus;
  Real total{};
  Real angle_identity_residual{};  // phi^- + 2(x-1) psi + phi^+ - delta
};

template <class Real>
LengthDecomposition<Real> orbit_length_decomposition(
    const CircularPolygon<Real>& poly, const Orbit<Real>& orb) {
  const int k = poly.size();
  LengthDecomposition<Real> dec;
  dec.impacts_per_arc.assign(static_cast<std::size_t>(k), 0);
  dec.psi.assign(static_cast<std::size_t>(k), 0);
  dec.phi_minus.assign(static_cast<std::size_t>(k), 0);
  dec.phi_plus.assign(static_cast<std::size_t>(k), 0);
  dec.ell.assign(static_cast<std::size_t>(k), 0);
  dec.ell_minus.assign(static_cast<std::size_t>(k), 0);
  dec.ell_plus.assign(static_cast<std::size_t>(k), 0);
  const std::size_t q = orb.points.size();
  if (q < 2) throw NotSliding("orbit too short");
  // rotate so the walk starts at the entry impact of arc 1, then record
  // the first and last offset per arc; the orbit must sweep the arcs once
  std::size_t start = q;
  for (std::size_t i = 0; i < q; ++i)
    if (orb.arcs[i] == 0 && orb.arcs[(i + q - 1) % q] == k - 1) {
      start = i;
      break;
    }
  if (start == q) throw NotSliding("no entry impact into the first arc");
  std::vector<Real> first(static_cast<std::size_t>(k), 0);
  std::vector<Real> last(static_cast<std::size_t>(k), 0);
  int prev_arc = k - 1;
  for (std::size_t s = 0; s < q; ++s) {
    const std::size_t i = (start + s) % q;
    int j = orb.arcs[i];
    Real off = poly.wrap(orb.points[i].phi) - poly.arc(j).a;
    if (off > poly.central_angle(j) - Real(kTolNode)) {
      // impact at the far node: belongs to the next arc
      j = (j + 1) % k;
      off = 0;
    }
    if (j != prev_arc && ((prev_arc + 1) % k) != j)
      throw NotSliding("arc indices skip at impact " + std::to_string(i));
    if (dec.impacts_per_arc[static_cast<std::size_t>(j)] == 0)
      first[static_cast<std::size_t>(j)] = off;
    last[static_cast<std::size_t>(j)] = off;
    ++dec.impacts_per_arc[static_cast<std::size_t>(j)];
    dec.psi[static_cast<std::size_t>(j)] = orb.points[i].theta;
    prev_arc = j;
  }
  dec.total = 0;
  dec.angle_identity_residual = 0;
  for (int j = 0; j < k; ++j) {
    const std::size_t js = static_cast<std::size_t>(j);
    if (dec.impacts_per_arc[js] == 0)
      throw NotSliding("arc " + std::to_string(j + 1) + " not visited");
    const Real d = poly.central_angle(j);
    const Real r = poly.radius(j);
    dec.phi_minus[js] = first[js];
    dec.phi_plus[js] = d - last[js];
    dec.ell[js] = 2 * r * std::sin(dec.psi[js]);
    dec.ell_minus[js] = r * std::sin(dec.phi_minus[js]) /
                        std::cos(dec.psi[js] - dec.phi_minus[js]);
    dec.ell_plus[js] = r * std::sin(dec.phi_plus[js]) /
                       std::cos(dec.psi[js] - dec.phi_plus[js]);
    dec.total += dec.ell_minus[js] +
                 Real(dec.impacts_per_arc[js] - 1) * dec.ell[js] +
                 dec.ell_plus[js];
    const Real resid = dec.phi_minus[js] +
                       2 * Real(dec.impacts_per_arc[js] - 1) * dec.psi[js] +
                       dec.phi_plus[js] - d;
    dec.angle_identity_residual =
        std::max(dec.angle_identity_residual, std::fabs(resid));
  }
  return dec;
}

// --- asymptotic-constant runs ----------------------------------------------

template <class Real>
struct SpectrumRunRow {
  long long q{};
  Real length{};
  Real scaled_defect{};  // (L - |Gamma|) q^2
};

template <class Real>
struct SpectrumRun {
  std::vector<SpectrumRunRow<Real>> rows;
  Real target_c{};
  Real extrapolated_c{};
  std::vector<Real> y;  // simplex point with h(y) = target
};

// Point of the closed limit polytope with the prescribed h value, found by
// bisection along the segment from the maximiser w(1/3) to the vertex
// minimiser (h is continuous, so every value in between is attained).
template <class Real>
std::vector<Real> solve_h_level(const CircularPolygon<Real>& poly, Real c,
                                const SpectrumInterval<Real>& iv) {
  if (c > iv.c1_plus + Real(1e-12) || c < iv.c1_minus - Real(1e-12))
    throw TargetOutOfRange("target outside [c1_minus, c1_plus]");
  const std::vector<Real>& a = iv.argmax;
  const std::vector<Real>& b = iv.vertex_argmin;
  Real lo = 0, hi = 1;  // h decreases from a (max) towards b (min)
  for (int it = 0; it < 80; ++it) {
    const Real m = (lo + hi) / 2;
    std::vector<Real> y(a.size());
    for (std::size_t j = 0; j < a.size(); ++j)
      y[j] = a[j] + m * (b[j] - a[j]);
    if (spectrum_h(poly, y) >= c)
      lo = m;
    else
      hi = m;
  }
  std::vector<Real> y(a.size());
  for (std::size_t j = 0; j < a.size(); ++j)
    y[j] = a[j] + (lo + hi) / 2 * (b[j] - a[j]);
  return y;
}

// Round q y to an integer configuration with sum q (floor plus a unit on
// the first few coordinates), run the variational orbit, and collect the
// scaled length defects; the constant is extrapolated with a 1/q correction.
template <class Real>
SpectrumRun<Real> asymptotic_constant(const CircularPolygon<Real>& poly,
                                      Real target_c,
                                      const std::vector<long long>& q_list) {
  const auto iv = spectrum_interval(poly);
  SpectrumRun<Real> run;
  run.target_c = target_c;
  run.y = solve_h_level(poly, target_c, iv);
  const Real perimeter = poly.total_length();
  for (long long q : q_list) {
    std::vector<long long> x(run.y.size());
    long long sum_floor = 0;
    for (std::size_t j = 0; j < run.y.size(); ++j) {
      x[j] = static_cast<long long>(std::floor(double(run.y[j]) * double(q)));
      sum_floor += x[j];
    }
    long long extra = q - sum_floor;
    for (std::size_t j = 0; j < run.y.size() && extra > 0; ++j, --extra)
      ++x[j];
    const auto res = find_periodic(poly, x);
    if (!res.converged)
      throw NoConvergence("variational orbit at q = " + std::to_string(q) +
                          " did not converge");
    SpectrumRunRow<Real> row;
    row.q = q;
    row.length = res.orbit.total_length();
    row.scaled_defect = (row.length - perimeter) * Real(q) * Real(q);
    run.rows.push_back(row);
  }
  // least-squares fit of scaled_defect = c + d/q
  Real s1 = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& row : run.rows) {
    const Real xq = 1 / Real(row.q);
    s1 += 1;
    sx += xq;
    sy += row.scaled_defect;
    sxx += xq * xq;
    sxy += xq * row.scaled_defect;
  }
  const Real det = s1 * sxx - sx * sx;
  run.extrapolated_c =
      det != 0 ? (sy * sxx - sx * sxy) / det : run.rows.back().scaled_defect;
  return run;
}

// Boundary distance between consecutive nodal impacts per arc: 2 pi r_j / q,
// never the smooth-oval value |Gamma|/q when radii differ.
template <class Real>
struct NodalAnomaly {
  long long q{};
  std::vector<Real> arc_gap;
  Real uniform_gap{};  // |Gamma| / q
};

template <class Real>
NodalAnomaly<Real> nodal_link_anomaly(const CircularPolygon<Real>& poly,
                                      long long i) {
  const auto rs = poly.rational_structure();
  if (!rs) throw NotRational("nodal anomaly needs a rational polygon");
  NodalAnomaly<Real> out;
  out.q = rs->M * i;
  out.uniform_gap = poly.total_length() / Real(out.q);
  for (int j = 0; j < poly.size(); ++j)
    out.arc_gap.push_back(2 * pi_v<Real>() * poly.radius(j) / Real(out.q));
  return out;
}

}  // namespace cpb
