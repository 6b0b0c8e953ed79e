#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cpb/billiard_map.hpp"
#include "cpb/errors.hpp"
#include "cpb/geometry.hpp"
#include "cpb/parallel.hpp"
#include "cpb/polygon.hpp"

namespace cpb {

enum class Half { minus, plus, full };

inline char half_to_char(Half h) {
  return h == Half::minus ? '-' : (h == Half::plus ? '+' : '*');
}

// Sandwich factors of the transition j -> j+1 and their addends.
template <class Real>
struct AlphaBeta {
  Real alpha_minus{}, alpha_plus{};
  Real beta_minus{}, beta_plus{};
};

template <class Real>
AlphaBeta<Real> alpha_beta(const CircularPolygon<Real>& poly, int j) {
  AlphaBeta<Real> ab;
  const Real ratio = poly.central_angle(j + 1) / poly.central_angle(j);
  const Real mu = poly.mu(j);
  ab.alpha_minus = ratio / std::max<Real>(1, mu);
  ab.alpha_plus = ratio / std::min<Real>(1, mu);
  ab.beta_minus = ab.alpha_minus + 1;
  ab.beta_plus = ab.alpha_plus + 1;
  return ab;
}

// Intersection of the slanted singularity segments through a_j (slope s)
// and a_{j+1} (slope -t): phi = a_j + s delta_j/(s+t), theta =
// delta_j/(2s+2t).
template <class Real>
PhasePoint<Real> segment_intersection(const CircularPolygon<Real>& poly, int j,
                                      Real s, Real t) {
  const Real delta = poly.central_angle(j);
  if (s < 0 || t < 0 || s + t < delta / (2 * pi_v<Real>()))
    throw EmptyIntersection("segments with slopes " + std::to_string(double(s)) +
                            ", -" + std::to_string(double(t)) +
                            " do not intersect");
  return {poly.singularity(j) + s * delta / (s + t), delta / (2 * (s + t))};
}

template <class Real>
struct FundamentalQuad {
  int j{};
  long long n{};
  Half half{Half::full};
  PhasePoint<Real> bl, br, tr, tl;  // counter-clockwise corners
  Real t_base{}, t_top{};           // slanted-coordinate band [t_top, t_base]
  Real theta_min{}, theta_max{};
};

// Slanted coordinate of a phase point inside the fundamental domain D_j: the
// value t with x on the segment of slope -t through a_{j+1}. Fundamental
// quadrilaterals are the bands t in [n-1, n].
namespace detail {

// Offset of phi from a_j, taking the representative nearest to the window
// [0, delta_j] so the coordinate stays continuous across the singularity.
template <class Real>
Real window_offset(const CircularPolygon<Real>& poly, int j, Real phi) {
  const Real a = poly.singularity(j);
  const Real delta = poly.central_angle(j);
  Real off = reduce_angle(phi - a, Real(0));
  if (off > delta + (2 * pi_v<Real>() - delta) / 2) off -= 2 * pi_v<Real>();
  return off;
}

}  // namespace detail

template <class Real>
Real slant_coord(const CircularPolygon<Real>& poly, int j,
                 const PhasePoint<Real>& x) {
  const Real off = detail::window_offset(poly, j, x.phi);
  return (poly.central_angle(j) - off) / (2 * x.theta);
}

// Position of x across D_j: 0 on the vertical side through a_j, 1 on the
// slanted side of slope 1.
template <class Real>
Real cross_coord(const CircularPolygon<Real>& poly, int j,
                 const PhasePoint<Real>& x) {
  return detail::window_offset(poly, j, x.phi) / (2 * x.theta);
}

template <class Real>
FundamentalQuad<Real> quad(const CircularPolygon<Real>& poly, int j,
                           long long n, Half half = Half::full) {
  if (n < 2) throw InvalidN("fundamental quadrilaterals need n >= 2");
  FundamentalQuad<Real> q;
  q.j = j;
  q.n = n;
  q.half = half;
  const Real t_lo = (half == Half::plus) ? Real(n) - Real(0.5) : Real(n);
  const Real t_hi = (half == Half::minus) ? Real(n) - Real(0.5) : Real(n - 1);
  q.t_base = t_lo;  // lower edge in theta
  q.t_top = t_hi;
  q.bl = segment_intersection(poly, j, Real(0), t_lo);
  q.br = segment_intersection(poly, j, Real(1), t_lo);
  q.tr = segment_intersection(poly, j, Real(1), t_hi);
  q.tl = segment_intersection(poly, j, Real(0), t_hi);
  q.theta_min = q.br.theta;
  q.theta_max = q.tl.theta;
  return q;
}

// Smallest per-arc indices for which the transition estimates apply: for
// mu_j < 1 the closed form max(2, 1 + ceil(mu_j delta_j / 2 delta_{j+1})),
// for mu_j > 1 the smallest chi with g(delta_j/(2 chi - 2); mu_j) <=
// delta_{j+1}.
template <class Real>
std::vector<long long> compute_chi(const CircularPolygon<Real>& poly) {
  const int k = poly.size();
  std::vector<long long> chi(k);
  for (int j = 0; j < k; ++j) {
    const Real mu = poly.mu(j);
    const Real dj = poly.central_angle(j);
    const Real dn = poly.central_angle(j + 1);
    if (mu < 1) {
      chi[j] = std::max<long long>(
          2, 1 + smallest_int_at_least(mu * dj / (2 * dn)));
    } else {
      long long c = 2;
      for (;; ++c) {
        if (c > 1000000)
          throw Unreachable("no admissible chi found for arc " +
                            std::to_string(j + 1));
        try {
          if (hubacher_angle(dj / Real(2 * c - 2), mu) <= dn) break;
        } catch (const DomainError&) {
        }
      }
      chi[j] = c;
    }
  }
  return chi;
}

// Vertical-jump windows: integers n' reachable from the (j, n) quadrilateral
// at the next arc. strict = false gives the stretching window, strict = true
// the disjoint-slab window.
template <class Real>
std::vector<long long> admissible_pairs(const CircularPolygon<Real>& poly,
                                        int j, long long n, bool strict,
                                        const std::vector<long long>& chi) {
  const int k = poly.size();
  if (n < chi[((j % k) + k) % k])
    throw InvalidParameter("n below chi_j");
  const auto ab = alpha_beta(poly, j);
  const Real lo_r = ab.alpha_minus * Real(n) + ab.beta_minus;
  const Real hi_r = ab.alpha_plus * Real(n) - ab.beta_plus;
  long long lo = strict ? smallest_int_above(lo_r) : smallest_int_at_least(lo_r);
  const long long hi =
      strict ? largest_int_below(hi_r) : largest_int_at_most(hi_r);
  lo = std::max(lo, chi[((j + 1) % k + k) % k]);
  std::vector<long long> out;
  for (long long v = lo; v <= hi; ++v) out.push_back(v);
  return out;
}

// The two inequalities behind each stretching window, compared with cleared
// denominators; the squared transition factor mu^2 = r_j/r_{j+1} keeps the
// comparison free of irrational intermediates.
template <class Real>
bool stretching_inequalities_hold(const CircularPolygon<Real>& poly, int j,
                                  long long n, long long n_prime,
                                  Half sigma_from) {
  const long double rj = static_cast<long double>(poly.radius(j));
  const long double rn = static_cast<long double>(poly.radius(j + 1));
  const long double dj = static_cast<long double>(poly.central_angle(j));
  const long double dn = static_cast<long double>(poly.central_angle(j + 1));
  bool half_side, edge_side;
  if (poly.mu(j) < 1) {
    // mu dj/(2n-1) <= dn/(2n'+2): the half-segment image clears the target
    half_side = rj * dj * dj * (2.0L * n_prime + 2) * (2.0L * n_prime + 2) <=
                rn * dn * dn * (2.0L * n - 1) * (2.0L * n - 1);
    // dn/(2n'-2) <= dj/(2n+2) (base) resp. dj/2n (top): the constant-theta
    // edges clear it on the other side
    edge_side = (sigma_from == Half::plus)
                    ? dn * (2.0L * n) <= dj * (2.0L * n_prime - 2)
                    : dn * (2.0L * n + 2) <= dj * (2.0L * n_prime - 2);
  } else {
    // mu dj/(2n+1) >= dn/(2n'-2)
    half_side = rj * dj * dj * (2.0L * n_prime - 2) * (2.0L * n_prime - 2) >=
                rn * dn * dn * (2.0L * n + 1) * (2.0L * n + 1);
    // dj/2n <= dn/(2n'+2) (base) resp. dj/(2n-2) <= dn/(2n'+2) (top)
    edge_side = (sigma_from == Half::plus)
                    ? dj * (2.0L * n_prime + 2) <= dn * (2.0L * n - 2)
                    : dj * (2.0L * n_prime + 2) <= dn * (2.0L * n);
  }
  return half_side && edge_side;
}

struct StretchOptions {
  int n_paths = 200;       // random chords in addition to the two lateral edges
  int samples = 2048;      // parameter resolution of the coarse scan
  std::uint64_t seed = 0;  // required for reproducibility
  int threads = 0;         // 0 = hardware concurrency
  double edge_tol = 1e-6;  // attainment tolerance for the band edges, t-units
};

struct StretchWitness {
  double u1{}, u2{};  // parameter subinterval whose image crosses the target
};

struct StretchReport {
  int j{};
  long long n{};
  long long n_prime{};
  Half sigma_from{}, sigma_to{};
  int paths_total{};
  int paths_crossing{};
  double success_fraction{};
  std::uint64_t seed{};
  std::vector<StretchWitness> witnesses;  // one per crossing path (capped)
};

namespace detail {

template <class Real>
struct PathFamily {
  std::vector<std::array<Real, 2>> ends;  // (sigma_base, sigma_top) per path
};

template <class Real>
PathFamily<Real> make_paths(int n_paths, std::uint64_t seed) {
  PathFamily<Real> fam;
  fam.ends.push_back({Real(0), Real(0)});  // lateral edges first
  fam.ends.push_back({Real(1), Real(1)});
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 2; i < n_paths; ++i)
    fam.ends.push_back({Real(u01(rng)), Real(u01(rng))});
  return fam;
}

// Image of a source-cell point after n iterates, reported in the slanted
// coordinates of the next fundamental domain. ok is false when the image
// left the domain.
template <class Real>
struct ImageCoord {
  Real t{};
  Real sigma{};
  bool ok{};
};

template <class Real>
class StretchScanner {
 public:
  StretchScanner(const CircularPolygon<Real>& poly, int j, long long n,
                 Half sigma_from, const StretchOptions& opt)
      : poly_(poly), j_(j), n_(n), opt_(opt) {
    src_ = quad(poly, j, n, sigma_from);
    fam_ = make_paths<Real>(opt.n_paths, opt.seed ^ key());
    images_.resize(fam_.ends.size());
    const int threads = opt.threads > 0 ? opt.threads : default_threads();
    parallel_for(fam_.ends.size(), threads, [&](std::size_t p) {
      auto& row = images_[p];
      row.resize(static_cast<std::size_t>(opt_.samples) + 1);
      for (int s = 0; s <= opt_.samples; ++s)
        row[static_cast<std::size_t>(s)] =
            eval(p, Real(s) / Real(opt_.samples));
    });
  }

  std::size_t paths() const { return fam_.ends.size(); }

  ImageCoord<Real> eval(std::size_t path, Real u) const {
    const auto [sb, st] = fam_.ends[path];
    const PhasePoint<Real> base = point_on_edge(sb, src_.t_base);
    const PhasePoint<Real> top = point_on_edge(st, src_.t_top);
    const PhasePoint<Real> x{base.phi + u * (top.phi - base.phi),
                             base.theta + u * (top.theta - base.theta)};
    const PhasePoint<Real> y = advance_steps(poly_, x, n_);
    ImageCoord<Real> ic;
    ic.t = slant_coord(poly_, j_ + 1, y);
    ic.sigma = cross_coord(poly_, j_ + 1, y);
    ic.ok = ic.sigma >= -Real(1e-7) && ic.sigma <= 1 + Real(1e-7);
    return ic;
  }

  // Locates a subpath whose image is a vertical path in the (n', sigma')
  // target cell: endpoints on the two band edges, interior inside the band.
  // Candidate crossings are the sign changes of t - mid in the cached scan;
  // each is expanded outward until both band edges are bracketed, then the
  // edge parameters are refined by bisection.
  std::optional<StretchWitness> find_crossing(std::size_t path,
                                              long long n_prime,
                                              Half sigma_to) const {
    const Real lo = (sigma_to == Half::plus) ? Real(n_prime) - 1
                                             : Real(n_prime) - Real(0.5);
    const Real hi = (sigma_to == Half::plus) ? Real(n_prime) - Real(0.5)
                                             : Real(n_prime);
    const auto& row = images_[path];
    const Real mid = (lo + hi) / 2;
    for (std::size_t i = 0; i + 1 < row.size(); ++i) {
      if (!row[i].ok || !row[i + 1].ok) continue;
      const bool high_i = row[i].t < mid, high_n = row[i + 1].t < mid;
      if (high_i == high_n) continue;
      // orient so t increases from sample i to i+1
      const bool increasing = row[i].t < row[i + 1].t;
      const auto lower = walk_to_edge(path, i, increasing ? -1 : +1, lo, hi,
                                      /*target_lo=*/true);
      if (!lower) continue;
      const auto upper = walk_to_edge(path, i, increasing ? +1 : -1, lo, hi,
                                      /*target_lo=*/false);
      if (!upper) continue;
      const Real u1 = increasing ? *lower : *upper;
      const Real u2 = increasing ? *upper : *lower;
      return StretchWitness{double(std::min(u1, u2)), double(std::max(u1, u2))};
    }
    return std::nullopt;
  }

 private:
  std::uint64_t key() const {
    return (std::uint64_t(j_) << 40) ^ (std::uint64_t(n_) << 8) ^
           std::uint64_t(src_.half == Half::plus);
  }

  PhasePoint<Real> point_on_edge(Real sigma, Real t) const {
    const PhasePoint<Real> l = segment_intersection(poly_, j_, Real(0), t);
    const PhasePoint<Real> r = segment_intersection(poly_, j_, Real(1), t);
    return {l.phi + sigma * (r.phi - l.phi),
            l.theta + sigma * (r.theta - l.theta)};
  }

  // Walk from the mid-crossing sample pair (i, i+1) in the given direction
  // over the cached scan until the band is left; the exit must be through
  // the requested edge (lo when target_lo, hi otherwise). Returns the edge
  // parameter refined by bisection inside the exit bracket.
  std::optional<Real> walk_to_edge(std::size_t path, std::size_t i, int dir,
                                   Real lo, Real hi, bool target_lo) const {
    const auto& row = images_[path];
    const Real edge = target_lo ? lo : hi;
    const Real slack = Real(opt_.edge_tol);
    std::ptrdiff_t p = static_cast<std::ptrdiff_t>(dir > 0 ? i + 1 : i);
    std::ptrdiff_t prev = p;
    while (p >= 0 && p < static_cast<std::ptrdiff_t>(row.size())) {
      if (!row[static_cast<std::size_t>(p)].ok) return std::nullopt;
      const Real t = row[static_cast<std::size_t>(p)].t;
      if (target_lo ? t <= lo + slack : t >= hi - slack) break;
      if (target_lo ? t >= hi - slack : t <= lo + slack)
        return std::nullopt;  // left through the wrong edge
      prev = p;
      p += dir;
    }
    if (p < 0 || p >= static_cast<std::ptrdiff_t>(row.size()))
      return std::nullopt;  // band edge never reached on this path
    Real ua = Real(prev) / Real(opt_.samples);
    Real ub = Real(p) / Real(opt_.samples);
    if (prev == p) {  // the sample adjacent to the crossing is already out
      ua = Real(dir > 0 ? i : i + 1) / Real(opt_.samples);
    }
    return bisect_to(path, ua, ub, edge);
  }

  // Bisect t(u) = target inside [ua, ub]; t is continuous there and the
  // endpoint values straddle the target.
  Real bisect_to(std::size_t path, Real ua, Real ub, Real target) const {
    const bool a_below = eval(path, ua).t < target;
    Real lo = ua, hi = ub;
    for (int it = 0; it < 48; ++it) {
      const Real m = (lo + hi) / 2;
      if ((eval(path, m).t < target) == a_below)
        lo = m;
      else
        hi = m;
    }
    return (lo + hi) / 2;
  }

  const CircularPolygon<Real>& poly_;
  int j_;
  long long n_;
  StretchOptions opt_;
  FundamentalQuad<Real> src_;
  PathFamily<Real> fam_;
  std::vector<std::vector<ImageCoord<Real>>> images_;
};

}  // namespace detail

template <class Real>
StretchReport verify_stretching_scanned(
    const detail::StretchScanner<Real>& scanner, int j, long long n,
    long long n_prime, Half sigma_from, Half sigma_to,
    const StretchOptions& opt) {
  StretchReport rep;
  rep.j = j;
  rep.n = n;
  rep.n_prime = n_prime;
  rep.sigma_from = sigma_from;
  rep.sigma_to = sigma_to;
  rep.seed = opt.seed;
  rep.paths_total = static_cast<int>(scanner.paths());
  for (std::size_t p = 0; p < scanner.paths(); ++p) {
    const auto w = scanner.find_crossing(p, n_prime, sigma_to);
    if (w) {
      ++rep.paths_crossing;
      if (rep.witnesses.size() < 8) rep.witnesses.push_back(*w);
    }
  }
  rep.success_fraction =
      rep.paths_total == 0
          ? 0.0
          : double(rep.paths_crossing) / double(rep.paths_total);
  return rep;
}

template <class Real>
StretchReport verify_stretching(const CircularPolygon<Real>& poly, int j,
                                long long n, long long n_prime,
                                Half sigma_from, Half sigma_to,
                                const StretchOptions& opt) {
  if (n < 2 || n_prime < 2 ||
      !stretching_inequalities_hold(poly, j, n, n_prime, sigma_from))
    throw NotAdmissiblePair("(" + std::to_string(n) + ", " +
                            std::to_string(n_prime) +
                            ") fails the stretching inequalities of arc " +
                            std::to_string(j + 1));
  detail::StretchScanner<Real> scanner(poly, j, n, sigma_from, opt);
  return verify_stretching_scanned(scanner, j, n, n_prime, sigma_from,
                                   sigma_to, opt);
}

}  // namespace cpb
