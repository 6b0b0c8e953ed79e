#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "cpb/billiard_map.hpp"
#include "cpb/cells.hpp"
#include "cpb/errors.hpp"
#include "cpb/polygon.hpp"
#include "cpb/symbols.hpp"

namespace cpb {

template <class Real>
struct Orbit {
  std::vector<PhasePoint<Real>> points;  // phase point before each link
  std::vector<Real> phi_unwrapped;
  std::vector<Vec2<Real>> impacts;
  std::vector<Real> lengths;  // chord i connects impact i and i+1 (cyclic
                              // for periodic orbits, one short otherwise)
  std::vector<int> arcs;
  Real closure_residual{};
  Real theta_drift{};
  std::optional<AdmissibleWord> itinerary;

  Real total_length() const {
    Real s = 0;
    for (Real l : lengths) s += l;
    return s;
  }
};

// Constant-angle periodic orbit through every node of a rational polygon:
// psi = delta/2i, period Mi.
template <class Real>
Orbit<Real> nodal_orbit(const CircularPolygon<Real>& poly, long long i) {
  const auto rs = poly.rational_structure();
  if (!rs) throw NotRational("nodal orbits need a rational polygon");
  if (i < 1) throw InvalidParameter("index i must be positive");
  const Real psi = rs->delta / Real(2 * i);
  const long long q = rs->M * i;
  Orbit<Real> orb;
  PhasePoint<Real> x{poly.arcs()[0].a, psi};
  Real phi_raw = x.phi;
  Real theta_min = psi, theta_max = psi;
  for (long long s = 0; s < q; ++s) {
    orb.points.push_back(x);
    orb.phi_unwrapped.push_back(phi_raw);
    orb.impacts.push_back(poly.point_at(x.phi));
    orb.arcs.push_back(poly.arc_index(x.phi));
    const auto rec = billiard_step(poly, x);
    orb.lengths.push_back(rec.link_length);
    phi_raw += rec.advance;
    x = rec.post;
    theta_min = std::min(theta_min, x.theta);
    theta_max = std::max(theta_max, x.theta);
  }
  orb.closure_residual =
      std::fabs(phi_raw - (orb.phi_unwrapped.front() + 2 * pi_v<Real>())) +
      std::fabs(x.theta - psi);
  orb.theta_drift = theta_max - theta_min;
  return orb;
}

template <class Real>
Real nodal_orbit_length(const CircularPolygon<Real>& poly, long long i) {
  const auto rs = poly.rational_structure();
  if (!rs) throw NotRational("nodal orbits need a rational polygon");
  const Real psi = rs->delta / Real(2 * i);
  Real L = 0;
  for (int j = 0; j < poly.size(); ++j)
    L += Real(i) * Real(rs->m[static_cast<std::size_t>(j)]) * 2 *
         poly.radius(j) * std::sin(psi);
  return L;
}

// --- variational (1,q)-periodic orbits ------------------------------------

struct FindPeriodicOptions {
  int ascent_sweeps = 2;
  int newton_iterations = 60;
  double grad_tol = 1e-12;
  double barrier = 1e-9;  // minimal angular distance to the nodes
};

template <class Real>
struct PeriodicResult {
  Orbit<Real> orbit;
  bool converged{};
  Real grad_norm{};
  int iterations{};
};

namespace detail {

// d|z(u_i) - z(u_{i-1})| terms of the length functional
template <class Real>
Real length_gradient_entry(const CircularPolygon<Real>& poly, Real u_prev,
                           Real u, Real u_next) {
  const Vec2<Real> zp = poly.point_at(u_prev);
  const Vec2<Real> z = poly.point_at(u);
  const Vec2<Real> zn = poly.point_at(u_next);
  const Vec2<Real> t = poly.tangent_at(u);
  Vec2<Real> in = z - zp;
  Vec2<Real> out = zn - z;
  const Real nin = in.norm(), nout = out.norm();
  if (nin == 0 || nout == 0) return 0;
  return t.dot(in) / nin - t.dot(out) / nout;
}

// cyclic tridiagonal solve (Sherman-Morrison on the corner entries)
template <class Real>
bool solve_cyclic_tridiagonal(std::vector<Real> a, std::vector<Real> b,
                              std::vector<Real> c, std::vector<Real> r,
                              std::vector<Real>& x) {
  const std::size_t n = b.size();
  if (n < 3) return false;
  const Real alpha = c[n - 1];  // corner (n-1, 0)
  const Real beta = a[0];       // corner (0, n-1)
  const Real gamma = -b[0];
  std::vector<Real> bb(b);
  bb[0] = b[0] - gamma;
  bb[n - 1] = b[n - 1] - alpha * beta / gamma;
  auto thomas = [&](std::vector<Real> rhs,
                    std::vector<Real>& out) -> bool {
    std::vector<Real> cp(n), dp(n);
    Real denom = bb[0];
    if (std::fabs(double(denom)) < 1e-300) return false;
    cp[0] = c[0] / denom;
    dp[0] = rhs[0] / denom;
    for (std::size_t i = 1; i < n; ++i) {
      denom = bb[i] - a[i] * cp[i - 1];
      if (std::fabs(double(denom)) < 1e-300) return false;
      cp[i] = (i + 1 < n ? c[i] : Real(0)) / denom;
      dp[i] = (rhs[i] - a[i] * dp[i - 1]) / denom;
    }
    out.assign(n, Real(0));
    out[n - 1] = dp[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
      out[i] = dp[i] - cp[i] * out[i + 1];
    return true;
  };
  std::vector<Real> u(n, Real(0));
  u[0] = gamma;
  u[n - 1] = alpha;
  std::vector<Real> y, zvec;
  if (!thomas(r, y)) return false;
  if (!thomas(u, zvec)) return false;
  const Real vy = y[0] + beta / gamma * y[n - 1];
  const Real vz = zvec[0] + beta / gamma * zvec[n - 1];
  const Real factor = vy / (1 + vz);
  x.resize(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = y[i] - factor * zvec[i];
  return true;
}

}  // namespace detail

// Longest closed chain with the prescribed number of impacts per arc,
// found by cyclic coordinate ascent followed by a Newton polish of the
// reflection equations. The impact counts must lie in the closed cone
// alpha^-_j x_j <= x_{j+1} <= alpha^+_j x_j.
template <class Real>
PeriodicResult<Real> find_periodic(const CircularPolygon<Real>& poly,
                                   const std::vector<long long>& impacts,
                                   const FindPeriodicOptions& opt = {}) {
  const int k = poly.size();
  if (static_cast<int>(impacts.size()) != k)
    throw InvalidParameter("need one impact count per arc");
  long long q = 0;
  for (int j = 0; j < k; ++j) {
    if (impacts[static_cast<std::size_t>(j)] < 1)
      throw NotInPolytope("impact counts must be positive");
    q += impacts[static_cast<std::size_t>(j)];
    const auto ab = alpha_beta(poly, j);
    const double xj = double(impacts[static_cast<std::size_t>(j)]);
    const double xn = double(impacts[static_cast<std::size_t>((j + 1) % k)]);
    if (xn < ab.alpha_minus * xj - 1e-9 || xn > ab.alpha_plus * xj + 1e-9)
      throw NotInPolytope("impact counts leave the sliding cone at arc " +
                          std::to_string(j + 1));
  }

  // equally spaced initialisation inside each arc
  std::vector<Real> u;
  u.reserve(static_cast<std::size_t>(q));
  std::vector<int> arc_of;
  for (int j = 0; j < k; ++j) {
    const Real aj = poly.singularity(j);
    const Real dj = poly.central_angle(j);
    const long long xj = impacts[static_cast<std::size_t>(j)];
    for (long long m = 0; m < xj; ++m) {
      u.push_back(aj + dj * (Real(m) + Real(0.5)) / Real(xj));
      arc_of.push_back(j);
    }
  }
  const std::size_t n = u.size();
  auto lo_of = [&](std::size_t i) {
    return poly.singularity(arc_of[i]) +
           Real(opt.barrier) * poly.central_angle(arc_of[i]);
  };
  auto hi_of = [&](std::size_t i) {
    return poly.singularity(arc_of[i]) +
           (1 - Real(opt.barrier)) * poly.central_angle(arc_of[i]);
  };
  auto grad_at = [&](std::size_t i) {
    const Real up = u[(i + n - 1) % n] - (i == 0 ? 2 * pi_v<Real>() : Real(0));
    const Real un = u[(i + 1) % n] + (i + 1 == n ? 2 * pi_v<Real>() : Real(0));
    return detail::length_gradient_entry(poly, up, u[i], un);
  };
  auto link_length = [&](std::size_t i) {  // |z(u_{i+1}) - z(u_i)|
    return (poly.point_at(u[(i + 1) % n]) - poly.point_at(u[i])).norm();
  };

  // coordinate ascent with golden-section refinement; each impact stays
  // between its cyclic neighbours to keep the combinatorics fixed
  const Real gr = (std::sqrt(Real(5)) - 1) / 2;
  const Real order_gap = Real(1e-7);
  auto neighbor_lo = [&](std::size_t i) {
    const Real up = u[(i + n - 1) % n] - (i == 0 ? 2 * pi_v<Real>() : Real(0));
    return std::max(lo_of(i), up + order_gap);
  };
  auto neighbor_hi = [&](std::size_t i) {
    const Real un = u[(i + 1) % n] + (i + 1 == n ? 2 * pi_v<Real>() : Real(0));
    return std::min(hi_of(i), un - order_gap);
  };
  for (int sweep = 0; sweep < opt.ascent_sweeps; ++sweep) {
    for (std::size_t i = 0; i < n; ++i) {
      Real lo = neighbor_lo(i), hi = neighbor_hi(i);
      if (!(lo < hi)) continue;
      auto f = [&](Real v) {
        const Real keep = u[i];
        u[i] = v;
        const Real len =
            link_length(i) + link_length((i + n - 1) % n);
        u[i] = keep;
        return len;
      };
      Real x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
      Real f1 = f(x1), f2 = f(x2);
      for (int it = 0; it < 40; ++it) {
        if (f1 < f2) {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + gr * (hi - lo);
          f2 = f(x2);
        } else {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - gr * (hi - lo);
          f1 = f(x1);
        }
      }
      u[i] = (lo + hi) / 2;
    }
  }

  // Newton polish on the reflection residuals
  PeriodicResult<Real> res;
  res.converged = false;
  const Real fd = Real(1e-7);
  for (int it = 0; it < opt.newton_iterations; ++it) {
    std::vector<Real> g(n);
    Real gmax = 0;
    for (std::size_t i = 0; i < n; ++i) {
      g[i] = grad_at(i);
      gmax = std::max(gmax, std::fabs(g[i]));
    }
    res.grad_norm = gmax;
    res.iterations = it;
    if (gmax <= Real(opt.grad_tol)) {
      res.converged = true;
      break;
    }
    std::vector<Real> sub(n), diag(n), sup(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (int off = -1; off <= 1; ++off) {
        const std::size_t m = (i + n + static_cast<std::size_t>(off)) % n;
        const Real keep = u[m];
        u[m] = keep + fd;
        const Real gp = grad_at(i);
        u[m] = keep - fd;
        const Real gm = grad_at(i);
        u[m] = keep;
        const Real d = (gp - gm) / (2 * fd);
        if (off == -1)
          sub[i] = d;
        else if (off == 0)
          diag[i] = d;
        else
          sup[i] = d;
      }
    }
    std::vector<Real> step;
    if (!detail::solve_cyclic_tridiagonal(sub, diag, sup, g, step)) break;
    Real damp = 1;
    for (std::size_t i = 0; i < n; ++i) {
      const Real target = u[i] - step[i];
      if (target < lo_of(i) || target > hi_of(i))
        damp = std::min(damp, Real(0.5));
    }
    for (std::size_t i = 0; i < n; ++i)
      u[i] = std::clamp(u[i] - damp * step[i], lo_of(i), hi_of(i));
    for (std::size_t i = 0; i < n; ++i)  // restore the cyclic order if bent
      u[i] = std::clamp(u[i], neighbor_lo(i), neighbor_hi(i));
  }

  Orbit<Real>& orb = res.orbit;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2<Real> z = poly.point_at(u[i]);
    const Vec2<Real> zn = poly.point_at(u[(i + 1) % n]);
    const Vec2<Real> t = poly.tangent_at(u[i]);
    const Vec2<Real> out = zn - z;
    Real theta = std::atan2(t.cross(out), t.dot(out));
    theta = std::clamp<Real>(theta, 0, pi_v<Real>());
    orb.points.push_back({poly.wrap(u[i]), theta});
    orb.phi_unwrapped.push_back(u[i]);
    orb.impacts.push_back(z);
    orb.arcs.push_back(arc_of[i]);
    orb.lengths.push_back(out.norm());
  }
  orb.closure_residual = res.grad_norm;
  Real tmin = orb.points[0].theta, tmax = tmin;
  for (const auto& xp : orb.points) {
    tmin = std::min(tmin, xp.theta);
    tmax = std::max(tmax, xp.theta);
  }
  orb.theta_drift = tmax - tmin;
  return res;
}

// --- itinerary shooting ----------------------------------------------------

// The shooting targets the full half-cells: the stretching property holds
// for paths spanning a whole cell, and the preimage of a window-extremal
// next cell can hug the base edge, so any fixed interior shrink of the
// targets would cut it off. band_guard only keeps the bisection off the
// exact cell boundary.
struct RealizeOptions {
  double band_guard = 1e-9;  // per-side shrink of each band, band fraction
  int scan_samples = 96;
  double path_slope = 0.4;   // the seed path follows the L^{0.4} segment
  std::uint64_t seed = 0;
};

template <class Real>
struct RealizedItinerary {
  PhasePoint<Real> start;
  Orbit<Real> orbit;        // only the checkpoints
  long long steps_total{};
  double min_margin{};      // worst distance to a cell edge, band units
};

namespace detail {

struct Checkpoint {
  int arc{};
  long long n{};
  bool plus{};
  long long steps_before{};  // impacts from the start to this cell
};

template <class Real>
struct ShootState {
  const CircularPolygon<Real>* poly{};
  std::vector<Checkpoint> cps;
  Real slope{};  // seed path slope parameter

  PhasePoint<Real> seed_point(Real w) const {
    // point on the slope segment of the first cell, w in [0,1] from base
    const auto& c0 = cps.front();
    const Real t_base = c0.plus ? Real(c0.n) - Real(0.5) : Real(c0.n);
    const Real t_top = c0.plus ? Real(c0.n) - 1 : Real(c0.n) - Real(0.5);
    const Real t = t_base + (t_top - t_base) * w;
    return segment_intersection(*poly, c0.arc, slope, t);
  }

  // slanted coordinate of the image at checkpoint m
  Real coord(Real w, std::size_t m) const {
    PhasePoint<Real> x = seed_point(w);
    x = advance_steps(*poly, x, cps[m].steps_before);
    return slant_coord(*poly, cps[m].arc, x);
  }
};

}  // namespace detail

// Initial conditions whose iterates visit the prescribed cells at the
// prescribed impact counts: nested bisection on the seed-path parameter,
// narrowing to the subinterval whose image crosses each next cell.
template <class Real>
RealizedItinerary<Real> realize_itinerary(const CircularPolygon<Real>& poly,
                                          const AdmissibleWord& word,
                                          const RealizeOptions& opt = {}) {
  if (word.symbols.empty()) throw InvalidParameter("empty itinerary");
  const int k = poly.size();
  detail::ShootState<Real> st;
  st.poly = &poly;
  st.slope = Real(opt.path_slope);
  long long steps = 0;
  for (const auto& q : word.symbols) {
    if (static_cast<int>(q.size()) != k)
      throw InvalidParameter("symbol length differs from arc count");
    for (int j = 0; j < k; ++j) {
      detail::Checkpoint cp;
      cp.arc = j;
      cp.n = std::llabs(q[static_cast<std::size_t>(j)]);
      cp.plus = q[static_cast<std::size_t>(j)] >= 0;
      cp.steps_before = steps;
      steps += cp.n;
      st.cps.push_back(cp);
    }
  }

  auto band = [&](const detail::Checkpoint& cp) {
    const Real h = Real(0.5);
    const Real lo =
        (cp.plus ? Real(cp.n) - 1 : Real(cp.n) - h) + Real(opt.band_guard) * h;
    const Real hi =
        (cp.plus ? Real(cp.n) - h : Real(cp.n)) - Real(opt.band_guard) * h;
    return std::pair<Real, Real>(lo, hi);
  };

  Real wlo = 0, whi = 1;
  for (std::size_t m = 1; m < st.cps.size(); ++m) {
    const auto [blo, bhi] = band(st.cps[m]);
    const Real bmid = (blo + bhi) / 2;
    const int S = opt.scan_samples;
    std::vector<Real> ws(static_cast<std::size_t>(S) + 1);
    std::vector<Real> ts(static_cast<std::size_t>(S) + 1);
    for (int s = 0; s <= S; ++s) {
      ws[static_cast<std::size_t>(s)] = wlo + (whi - wlo) * Real(s) / Real(S);
      ts[static_cast<std::size_t>(s)] =
          st.coord(ws[static_cast<std::size_t>(s)], m);
    }
    // bisect t(w) = target inside a bracket whose endpoint values straddle it
    auto bisect = [&](Real a, Real b, Real target) {
      const bool below = st.coord(a, m) < target;
      for (int it = 0; it < 60; ++it) {
        const Real mid = (a + b) / 2;
        if ((st.coord(mid, m) < target) == below)
          a = mid;
        else
          b = mid;
      }
      return (a + b) / 2;
    };
    bool found = false;
    for (int s = 0; s + 1 <= S && !found; ++s) {
      if ((ts[static_cast<std::size_t>(s)] < bmid) ==
          (ts[static_cast<std::size_t>(s + 1)] < bmid))
        continue;
      // expand over the scan until both band edges are bracketed
      auto walk = [&](int from, int dir, Real edge) -> std::optional<Real> {
        const Real t0 = ts[static_cast<std::size_t>(from)];
        const Real tp = ts[static_cast<std::size_t>(from - dir)];
        if ((t0 - edge) * (tp - edge) <= 0)  // crossing pair brackets it
          return bisect(ws[static_cast<std::size_t>(from - dir)],
                        ws[static_cast<std::size_t>(from)], edge);
        const bool seek_up = t0 < edge;
        for (int p = from + dir; p >= 0 && p <= S; p += dir) {
          const Real t = ts[static_cast<std::size_t>(p)];
          if (seek_up ? t >= edge : t <= edge)
            return bisect(ws[static_cast<std::size_t>(p - dir)],
                          ws[static_cast<std::size_t>(p)], edge);
          if (t < blo - (bhi - blo) || t > bhi + (bhi - blo))
            return std::nullopt;  // left the cell through the wrong side
        }
        return std::nullopt;
      };
      const bool increasing = ts[static_cast<std::size_t>(s)] <
                              ts[static_cast<std::size_t>(s + 1)];
      const auto w_lo_edge = walk(increasing ? s : s + 1, increasing ? -1 : +1,
                                  blo);
      const auto w_hi_edge = walk(increasing ? s + 1 : s, increasing ? +1 : -1,
                                  bhi);
      if (!w_lo_edge || !w_hi_edge) continue;
      wlo = std::min(*w_lo_edge, *w_hi_edge);
      whi = std::max(*w_lo_edge, *w_hi_edge);
      found = true;
    }
    if (!found)
      throw RealizationFailed("no crossing of cell " + std::to_string(m) +
                              " of " + std::to_string(st.cps.size()) +
                              " (turn " + std::to_string(m / k) + ")");
  }

  RealizedItinerary<Real> out;
  const Real w_star = (wlo + whi) / 2;
  out.start = st.seed_point(w_star);
  out.steps_total = steps;
  out.min_margin = std::numeric_limits<double>::infinity();
  PhasePoint<Real> x = out.start;
  long long done = 0;
  for (std::size_t m = 0; m < st.cps.size(); ++m) {
    const auto& cp = st.cps[m];
    x = advance_steps(poly, x, cp.steps_before - done);
    done = cp.steps_before;
    const Real t = slant_coord(poly, cp.arc, x);
    const Real t_lo = cp.plus ? Real(cp.n) - 1 : Real(cp.n) - Real(0.5);
    const Real t_hi = cp.plus ? Real(cp.n) - Real(0.5) : Real(cp.n);
    const double margin =
        double(std::min(t - t_lo, t_hi - t) / (t_hi - t_lo));
    out.min_margin = std::min(out.min_margin, margin);
    if (margin <= 0)
      throw RealizationFailed("itinerary left its cell at checkpoint " +
                              std::to_string(m));
    out.orbit.points.push_back(x);
    out.orbit.arcs.push_back(poly.arc_index(x.phi));
    out.orbit.impacts.push_back(poly.point_at(x.phi));
  }
  out.orbit.itinerary = word;
  return out;
}

// --- asymptotic orbits and speed constants ---------------------------------

struct SpeedConstants {
  double d_minus{}, d_plus{};
  double a{}, b{};
};

inline SpeedConstants speed_constants(const SymbolicParams& sp,
                                      const SymbolicConstants& sc,
                                      const std::vector<double>& deltas) {
  SpeedConstants s;
  const double d1 = deltas[0];
  const double dmax = *std::max_element(deltas.begin(), deltas.end());
  const double dmin = *std::min_element(deltas.begin(), deltas.end());
  const double chi1 = double(sp.chi[0]);
  double fmax = 0, fmin = std::numeric_limits<double>::infinity();
  for (int j = 0; j < sp.k; ++j) {
    const double chij = double(sp.chi[j]);
    fmax = std::max(fmax, (chi1 + 1) * chij / ((chij - 1) * chi1));
    fmin = std::min(fmin, (chi1 - 1) * chij / ((chij + 1) * chi1));
  }
  s.d_plus = sc.lambda_prime / d1 * dmax * fmax;
  s.d_minus = sc.nu_prime / d1 * dmin * fmin;
  s.a = (2 * chi1 - 2) / (chi1 * d1 * s.d_plus);
  s.b = (2 * chi1 + 2) / (chi1 * d1 * s.d_minus);
  if (!(s.d_minus < s.d_plus) || !(s.a < s.b))
    throw InvalidParameter("inconsistent speed constants");
  return s;
}

template <class Real>
struct AsymptoticCertificate {
  PhasePoint<Real> start;
  long long n{};
  int turns{};
  double min_ratio{}, max_ratio{};  // extremes of l theta_l / theta_0
  double lower{}, upper{};          // n d_-, n d_+
  double max_inverse_theta_over_l{};
  bool bounds_hold{};
};

// Realize the maximal-growth itinerary from first-arc count n and certify
// the linear-speed window along the realized impacts.
template <class Real>
AsymptoticCertificate<Real> asymptotic_orbit(
    const CircularPolygon<Real>& poly, const SymbolicParams& sp,
    const SpeedConstants& sc, long long n, int turns,
    Orbit<Real>* full_orbit = nullptr, const RealizeOptions& opt = {}) {
  AdmissibleWord word;
  for (int i = 0; i < turns; ++i) {
    Symbol q(static_cast<std::size_t>(sp.k));
    for (int j = 0; j < sp.k; ++j)
      q[static_cast<std::size_t>(j)] = xi_bounds(sp, i, j, n, turns + 1).xi;
    word.symbols.push_back(std::move(q));
  }
  const auto real = realize_itinerary(poly, word, opt);

  AsymptoticCertificate<Real> cert;
  cert.start = real.start;
  cert.n = n;
  cert.turns = turns;
  cert.lower = double(n) * sc.d_minus;
  cert.upper = double(n) * sc.d_plus;
  cert.min_ratio = std::numeric_limits<double>::infinity();
  cert.max_ratio = 0;
  cert.max_inverse_theta_over_l = 0;
  const double theta0 = double(real.start.theta);
  PhasePoint<Real> x = real.start;
  for (long long l = 1; l <= real.steps_total; ++l) {
    const auto rec = billiard_step(poly, x);
    x = rec.post;
    if (full_orbit) {
      full_orbit->points.push_back(x);
      full_orbit->arcs.push_back(poly.arc_index(x.phi));
      full_orbit->lengths.push_back(rec.link_length);
    }
    if (l >= n) {
      const double ratio = double(l) * double(x.theta) / theta0;
      cert.min_ratio = std::min(cert.min_ratio, ratio);
      cert.max_ratio = std::max(cert.max_ratio, ratio);
      cert.max_inverse_theta_over_l = std::max(
          cert.max_inverse_theta_over_l, 1.0 / (double(x.theta) * double(l)));
    }
  }
  cert.bounds_hold = cert.min_ratio >= cert.lower - 1e-9 &&
                     cert.max_ratio <= cert.upper + 1e-9 &&
                     cert.max_inverse_theta_over_l <= sc.b + 1e-9;
  return cert;
}

struct DivergenceReport {
  double min_l_theta{};       // min over orbits and l of l * theta_l
  double sum_ratio{};         // sum_{l<N} theta / sum_{l<N/2} theta, worst
  long long steps{};
};

template <class Real>
DivergenceReport divergence_check(const CircularPolygon<Real>& poly,
                                  const std::vector<PhasePoint<Real>>& seeds,
                                  long long N) {
  DivergenceReport rep;
  rep.min_l_theta = std::numeric_limits<double>::infinity();
  rep.sum_ratio = std::numeric_limits<double>::infinity();
  rep.steps = N;
  for (const auto& seed : seeds) {
    PhasePoint<Real> x = seed;
    double half_sum = 0, full_sum = 0;
    for (long long l = 1; l <= N; ++l) {
      x = billiard_step(poly, x).post;
      const double th = double(x.theta);
      full_sum += th;
      if (l <= N / 2) half_sum += th;
      rep.min_l_theta = std::min(rep.min_l_theta, double(l) * th);
    }
    if (half_sum > 0)
      rep.sum_ratio = std::min(rep.sum_ratio, full_sum / half_sum);
  }
  return rep;
}

}  // namespace cpb
