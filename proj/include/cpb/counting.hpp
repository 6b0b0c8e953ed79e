#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cpb/errors.hpp"
#include "cpb/parallel.hpp"
#include "cpb/symbols.hpp"

namespace cpb {

struct Inequality {
  std::vector<double> normal;
  double offset{};
  bool strict{};
};

struct HalfspacePolytope {
  int dim{};
  std::vector<Inequality> ineqs;

  bool contains(const std::vector<double>& x, double tol = 0.0) const {
    for (const auto& q : ineqs) {
      double s = 0;
      for (int i = 0; i < dim; ++i) s += q.normal[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
      if (q.strict ? !(s < q.offset + tol) : !(s <= q.offset + tol))
        return false;
    }
    return true;
  }
};

namespace detail {

inline std::vector<double> unit_normal(int dim, int idx, double v) {
  std::vector<double> n(static_cast<std::size_t>(dim), 0.0);
  n[static_cast<std::size_t>(idx)] = v;
  return n;
}

}  // namespace detail

// The unbounded open polytope of per-slot impact counts of p-turn periodic
// itineraries: chain and wraparound sandwiches plus the chi floors,
// 3kp inequalities in R^{kp}.
inline HalfspacePolytope polytope_P(const SymbolicParams& sp, int p) {
  if (p < 1) throw InvalidParameter("p must be positive");
  const int dim = sp.k * p;
  HalfspacePolytope P;
  P.dim = dim;
  for (int s = 0; s < dim; ++s) {
    const int m = s % sp.k;
    const int t = (s + 1) % dim;
    // alpha^-_m x_s + beta^-_m < x_t
    Inequality lo;
    lo.normal = detail::unit_normal(dim, s, sp.alpha_minus[m]);
    lo.normal[static_cast<std::size_t>(t)] -= 1.0;
    lo.offset = -sp.beta_minus[m];
    lo.strict = true;
    P.ineqs.push_back(std::move(lo));
    // x_t < alpha^+_m x_s - beta^+_m
    Inequality hi;
    hi.normal = detail::unit_normal(dim, t, 1.0);
    hi.normal[static_cast<std::size_t>(s)] -= sp.alpha_plus[m];
    hi.offset = -sp.beta_plus[m];
    hi.strict = true;
    P.ineqs.push_back(std::move(hi));
    // x_s >= chi_m
    Inequality fl;
    fl.normal = detail::unit_normal(dim, s, -1.0);
    fl.offset = -double(sp.chi[m]);
    fl.strict = false;
    P.ineqs.push_back(std::move(fl));
  }
  return P;
}

// Exact number of integer points of P^(p) with coordinate sum q: dynamic
// programme over the chain conditioned on the first slot, wraparound
// enforced against it.
inline BigInt count_Gq(const SymbolicParams& sp, int p, long long q) {
  if (p < 1 || q <= p) throw InvalidParameter("need 1 <= p < q");
  const int slots = sp.k * p;
  const long long chi_min = *std::min_element(sp.chi.begin(), sp.chi.end());
  BigInt total = 0;
  for (long long v = sp.chi[0]; v <= q - (slots - 1) * chi_min; ++v) {
    // layer: value and running sum after each slot; the last slot is
    // determined by the sum, so only slots-1 are enumerated
    std::map<long long, std::map<long long, BigInt>> layer;
    layer[v][v] = 1;
    for (int s = 1; s + 1 < slots; ++s) {
      const int m = (s - 1) % sp.k;
      const long long left = slots - 1 - s;
      std::map<long long, std::map<long long, BigInt>> next;
      for (const auto& [val, sums] : layer) {
        const auto w = forward_window(sp, m, val, sp.chi[s % sp.k]);
        for (long long u = w.lo; u <= w.hi; ++u) {
          for (const auto& [sum, cnt] : sums) {
            const long long ns = sum + u;
            if (ns + left * chi_min > q) continue;
            next[u][ns] += cnt;
          }
        }
      }
      layer.swap(next);
      if (layer.empty()) break;
    }
    for (const auto& [val, sums] : layer) {
      for (const auto& [sum, cnt] : sums) {
        const long long last = q - sum;
        if (last < sp.chi[(slots - 1) % sp.k]) continue;
        if (!chains(sp, (slots - 2) % sp.k, val, last)) continue;
        if (!chains(sp, sp.k - 1, last, v)) continue;  // wraparound
        total += cnt;
      }
    }
  }
  return total;
}

// Number of weak compositions of q into n parts, each at most m:
// coefficient of x^q in (1 + x + ... + x^m)^n.
inline BigInt weak_compositions(int n, int m, long long q) {
  if (n < 1 || m < 1) throw InvalidParameter("need n, m >= 1");
  if (q < 0 || q > static_cast<long long>(n) * m) return 0;
  std::vector<BigInt> c{1};
  for (int i = 0; i < n; ++i) {
    std::vector<BigInt> nc(std::min<std::size_t>(
        c.size() + static_cast<std::size_t>(m),
        static_cast<std::size_t>(q) + 1));
    for (std::size_t d = 0; d < c.size(); ++d) {
      if (c[d] == 0) continue;
      for (int r = 0; r <= m; ++r) {
        const std::size_t t = d + static_cast<std::size_t>(r);
        if (t >= nc.size()) break;
        nc[t] += c[d];
      }
    }
    c.swap(nc);
  }
  return static_cast<std::size_t>(q) < c.size()
             ? c[static_cast<std::size_t>(q)]
             : BigInt(0);
}

// Principal branch of the Lambert W function on [-1/e, +inf), by Halley's
// iteration.
inline double lambert_w0(double x) {
  const double inv_e = std::exp(-1.0);
  if (x < -inv_e - 1e-15)
    throw DomainError("lambert_w0 needs x >= -1/e");
  if (x < -inv_e) x = -inv_e;
  if (x == 0) return 0;
  double w = x < 1 ? x * (1 - x) : std::log(x);
  if (x > 3) w = std::log(x) - std::log(std::log(x));
  for (int it = 0; it < 64; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double d = ew * (w + 1) - (w + 2) * f / (2 * w + 2);
    const double step = f / d;
    w -= step;
    if (std::fabs(f) <= 1e-16 * std::max(1.0, std::fabs(x)) ||
        std::fabs(step) < 1e-17)
      break;
  }
  return w;
}

struct BoundConstants {
  double a_star{}, b_star{}, h_star{}, x_star{}, M_star{}, c_star_of_p{};
  std::vector<double> alpha_geo;  // alpha_j = sqrt(alpha^-_j alpha^+_j)
  std::vector<double> A_j;        // prefix products, A_1 = 1
  double A{};
  int k{}, p{};
};

inline BoundConstants bound_constants(const SymbolicParams& sp, int p) {
  BoundConstants c;
  c.k = sp.k;
  c.p = p;
  c.alpha_geo.resize(sp.k);
  c.A_j.resize(sp.k);
  double prod = 1;
  for (int j = 0; j < sp.k; ++j) {
    c.alpha_geo[j] = std::sqrt(sp.alpha_minus[j] * sp.alpha_plus[j]);
    c.A_j[j] = prod;
    prod *= c.alpha_geo[j];
  }
  c.A = std::accumulate(c.A_j.begin(), c.A_j.end(), 0.0) / sp.k;
  double amin = std::numeric_limits<double>::infinity();
  for (int j = 0; j < sp.k; ++j) {
    amin = std::min(amin, (c.alpha_geo[j] - sp.alpha_minus[j]) * c.A_j[j] /
                              ((1 + sp.alpha_minus[j]) * c.A));
    amin = std::min(amin, (sp.alpha_plus[j] - c.alpha_geo[j]) * c.A_j[j] /
                              ((1 + sp.alpha_plus[j]) * c.A));
  }
  c.a_star = 4 * amin;
  c.b_star = 6 + 4 * double(*std::max_element(sp.chi.begin(), sp.chi.end()));
  const double W = lambert_w0(c.b_star / std::exp(1.0));
  c.h_star = c.a_star * W / c.b_star;
  c.x_star = c.a_star * W / ((1 + W) * c.b_star);
  c.M_star = 2 * std::pow(c.a_star / c.x_star - c.b_star, -double(sp.k) - 1) /
             c.x_star;
  c.c_star_of_p = 2 * std::pow(c.a_star, sp.k * p - 1) /
                  std::pow(double(sp.k) * p, sp.k * p);
  return c;
}

struct BoundCheckRow {
  long long q{};
  BigInt gq;
  double scaled_count{};  // 2^{kp} G_q
  double bound{};         // 2 (a* q / kp - b*)^{kp-1} / kp
};

struct BoundCheckReport {
  std::vector<BoundCheckRow> rows;
  double q_threshold{};   // b* k p / a*
  double grid_argmax{};   // argmax of h(x) on the grid
  double grid_cell{};
  BoundConstants constants;
};

// Exponential-rate function behind the lower bounds.
inline double rate_h(double x, double a, double b) {
  return x * std::log(a / x - b);
}

inline BoundCheckReport check_lower_bounds(const SymbolicParams& sp, int p,
                                           long long q_max,
                                           int h_grid_points = 200) {
  BoundCheckReport rep;
  rep.constants = bound_constants(sp, p);
  const double a = rep.constants.a_star, b = rep.constants.b_star;
  const int kp = sp.k * p;
  rep.q_threshold = b * kp / a;
  for (long long q = static_cast<long long>(std::floor(rep.q_threshold)) + 1;
       q <= q_max; ++q) {
    BoundCheckRow row;
    row.q = q;
    row.gq = count_Gq(sp, p, q);
    row.scaled_count = std::ldexp(1.0, kp) * row.gq.convert_to<double>();
    row.bound = 2 * std::pow(a * double(q) / kp - b, kp - 1) / kp;
    if (row.scaled_count < row.bound)
      throw BoundViolation("counting bound fails at q = " + std::to_string(q));
    rep.rows.push_back(std::move(row));
  }
  // maximality of the Lambert-W optimum on a grid of (0, a/(b+1)]
  const double xmax = a / (b + 1);
  rep.grid_cell = xmax / h_grid_points;
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 1; i <= h_grid_points; ++i) {
    const double x = xmax * i / h_grid_points;
    const double h = rate_h(x, a, b);
    if (h > best) {
      best = h;
      rep.grid_argmax = x;
    }
  }
  if (std::fabs(rep.grid_argmax - rep.constants.x_star) > rep.grid_cell)
    throw BoundViolation("h(x) grid maximum away from x_star");
  return rep;
}

struct CubeInPolytope {
  std::vector<double> center;
  double t_star{};
};

// Axis-aligned cube around the scaled prefix-product center, contained in
// P^(p) for every radius below t_star.
inline CubeInPolytope cube_in_polytope(const SymbolicParams& sp, int p,
                                       long long q) {
  const auto c = bound_constants(sp, p);
  const int dim = sp.k * p;
  CubeInPolytope cube;
  cube.center.resize(static_cast<std::size_t>(dim));
  for (int s = 0; s < dim; ++s)
    cube.center[static_cast<std::size_t>(s)] =
        double(q) * c.A_j[s % sp.k] / (dim * c.A);
  const double kappa = c.a_star / 4;
  const double tau =
      double(*std::max_element(sp.chi.begin(), sp.chi.end()));
  cube.t_star = kappa * double(q) / dim - tau;
  if (cube.t_star <= 0)
    throw EmptyCube("q too small: t_star = " + std::to_string(cube.t_star));
  return cube;
}

// --- Wills-type lattice bounds for boxes and right simplices ------------

struct LatticeShape {
  enum class Kind { box, simplex };
  Kind kind{Kind::box};
  int dim{};
  std::vector<double> sides;  // box only

  static LatticeShape box(std::vector<double> s) {
    LatticeShape k;
    k.kind = Kind::box;
    k.dim = static_cast<int>(s.size());
    k.sides = std::move(s);
    return k;
  }
  static LatticeShape simplex(int n) {
    LatticeShape k;
    k.kind = Kind::simplex;
    k.dim = n;
    return k;
  }

  double volume() const {
    if (kind == Kind::box) {
      double v = 1;
      for (double s : sides) v *= s;
      return v;
    }
    double f = 1;
    for (int i = 2; i <= dim; ++i) f *= i;
    return 1.0 / f;
  }

  double inradius() const {
    if (kind == Kind::box)
      return *std::min_element(sides.begin(), sides.end()) / 2;
    return 1.0 / (dim + std::sqrt(double(dim)));
  }

  BigInt count_dilated(double t) const {
    if (t < 0) return 0;
    if (kind == Kind::box) {
      BigInt c = 1;
      for (double s : sides)
        c *= BigInt(static_cast<long long>(std::floor(t * s)) + 1);
      return c;
    }
    // #(t simplex cap Z^n) = C(floor(t) + n, n)
    const long long ft = static_cast<long long>(std::floor(t));
    BigInt c = 1;
    for (int i = 1; i <= dim; ++i) c = c * BigInt(ft + i) / i;
    return c;
  }
};

struct WillsRow {
  double t{};
  BigInt count;
  double bound{};
};

inline std::vector<WillsRow> wills_check(const LatticeShape& shape,
                                         const std::vector<double>& t_grid) {
  if (shape.dim > 3)
    throw DimensionTooLarge("closed-form shapes only up to dimension 3");
  std::vector<WillsRow> rows;
  const double rho = shape.inradius();
  const double t0 = std::sqrt(double(shape.dim)) / (2 * rho);
  for (double t : t_grid) {
    if (t < t0) continue;
    WillsRow r;
    r.t = t;
    r.count = shape.count_dilated(t);
    r.bound = shape.volume() * std::pow(t - t0, shape.dim);
    if (r.count.convert_to<double>() < r.bound)
      throw BoundViolation("Wills bound fails at t = " + std::to_string(t));
    rows.push_back(std::move(r));
  }
  return rows;
}

// --- limit polytope and volumes -----------------------------------------

// Closed projected limit polytope of P^(p)/q as q -> infinity, in R^{kp-1}.
inline HalfspacePolytope limit_polytope(const SymbolicParams& sp, int p) {
  const int n = sp.k * p - 1;
  HalfspacePolytope K;
  K.dim = n;
  auto idx = [&](int j_1based) { return (j_1based - 1) % sp.k; };
  for (int j = 1; j <= n - 1; ++j) {
    const int m = idx(j);
    Inequality lo;  // alpha^-_j x_j - x_{j+1} <= 0
    lo.normal = detail::unit_normal(n, j - 1, sp.alpha_minus[m]);
    lo.normal[static_cast<std::size_t>(j)] -= 1.0;
    lo.offset = 0;
    K.ineqs.push_back(std::move(lo));
    Inequality hi;  // x_{j+1} - alpha^+_j x_j <= 0
    hi.normal = detail::unit_normal(n, j, 1.0);
    hi.normal[static_cast<std::size_t>(j - 1)] -= sp.alpha_plus[m];
    hi.offset = 0;
    K.ineqs.push_back(std::move(hi));
  }
  {
    const int m = idx(n);
    // alpha^-_n x_n <= 1 - s(x) and 1 - s(x) <= alpha^+_n x_n
    Inequality lo;
    lo.normal.assign(static_cast<std::size_t>(n), 1.0);
    lo.normal[static_cast<std::size_t>(n - 1)] += sp.alpha_minus[m];
    lo.offset = 1.0;
    K.ineqs.push_back(std::move(lo));
    Inequality hi;
    hi.normal.assign(static_cast<std::size_t>(n), -1.0);
    hi.normal[static_cast<std::size_t>(n - 1)] -= sp.alpha_plus[m];
    hi.offset = -1.0;
    K.ineqs.push_back(std::move(hi));
  }
  {
    const int m = idx(n + 1);
    // alpha^-_{n+1} (1 - s(x)) <= x_1: -x_1 - alpha^- s(x) <= -alpha^-
    Inequality lo;
    lo.normal.assign(static_cast<std::size_t>(n), -sp.alpha_minus[m]);
    lo.normal[0] -= 1.0;
    lo.offset = -sp.alpha_minus[m];
    K.ineqs.push_back(std::move(lo));
    // x_1 <= alpha^+_{n+1} (1 - s(x)): x_1 + alpha^+ s(x) <= alpha^+
    Inequality hi;
    hi.normal.assign(static_cast<std::size_t>(n), sp.alpha_plus[m]);
    hi.normal[0] += 1.0;
    hi.offset = sp.alpha_plus[m];
    K.ineqs.push_back(std::move(hi));
  }
  for (int j = 0; j < n; ++j) {
    Inequality fl;
    fl.normal = detail::unit_normal(n, j, -1.0);
    fl.offset = 0;
    K.ineqs.push_back(std::move(fl));
  }
  {
    Inequality sum1;
    sum1.normal.assign(static_cast<std::size_t>(n), 1.0);
    sum1.offset = 1.0;
    K.ineqs.push_back(std::move(sum1));
  }
  return K;
}

struct VolumeEstimate {
  double volume{};
  double ci_halfwidth{};  // 99% binomial confidence, Monte Carlo only
  double c_star_optimal{};
};

inline VolumeEstimate volume_monte_carlo(const HalfspacePolytope& K, int kp,
                                         long long samples,
                                         std::uint64_t seed, int threads = 0) {
  if (K.dim > 7) throw DimensionTooLarge("Monte Carlo volume only up to kp = 8");
  const int nthreads = threads > 0 ? threads : default_threads();
  const int shards = 64;
  std::vector<long long> hits(shards, 0);
  std::vector<long long> tries(shards, 0);
  parallel_for(shards, nthreads, [&](std::size_t shard) {
    std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * (shard + 1));
    std::exponential_distribution<double> exp1(1.0);
    std::vector<double> x(static_cast<std::size_t>(K.dim));
    const long long local = samples / shards + (shard < samples % shards ? 1 : 0);
    long long h = 0;
    for (long long i = 0; i < local; ++i) {
      double total = exp1(rng);
      for (int d = 0; d < K.dim; ++d) {
        x[static_cast<std::size_t>(d)] = exp1(rng);
        total += x[static_cast<std::size_t>(d)];
      }
      for (int d = 0; d < K.dim; ++d) x[static_cast<std::size_t>(d)] /= total;
      if (K.contains(x, 0.0)) ++h;
    }
    hits[shard] = h;
    tries[shard] = local;
  });
  long long hit = 0, tot = 0;
  for (int s = 0; s < shards; ++s) {
    hit += hits[s];
    tot += tries[s];
  }
  double fact = 1;
  for (int i = 2; i <= K.dim; ++i) fact *= i;
  const double frac = double(hit) / double(tot);
  VolumeEstimate v;
  v.volume = frac / fact;
  v.ci_halfwidth =
      2.576 * std::sqrt(std::max(frac * (1 - frac), 1e-12) / double(tot)) /
      fact;
  v.c_star_optimal = std::ldexp(v.volume, kp);
  return v;
}

// --- exact small-dimension volume via vertex enumeration ------------------

namespace detail {

inline bool solve_linear(std::vector<std::vector<double>> A,
                         std::vector<double> b, std::vector<double>& out) {
  const int n = static_cast<int>(b.size());
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::fabs(A[r][c]) > std::fabs(A[piv][c])) piv = r;
    if (std::fabs(A[piv][c]) < 1e-12) return false;
    std::swap(A[piv], A[c]);
    std::swap(b[piv], b[c]);
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = A[r][c] / A[c][c];
      for (int cc = c; cc < n; ++cc) A[r][cc] -= f * A[c][cc];
      b[r] -= f * b[c];
    }
  }
  out.resize(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) out[static_cast<std::size_t>(c)] = b[c] / A[c][c];
  return true;
}

}  // namespace detail

inline std::vector<std::vector<double>> enumerate_vertices(
    const HalfspacePolytope& K, double tol = 1e-9) {
  const int d = K.dim;
  const int m = static_cast<int>(K.ineqs.size());
  if (d > 5) throw DimensionTooLarge("vertex enumeration only up to 5 dims");
  std::vector<std::vector<double>> verts;
  std::vector<int> pick(static_cast<std::size_t>(d));
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == d) {
      std::vector<std::vector<double>> A(static_cast<std::size_t>(d));
      std::vector<double> b(static_cast<std::size_t>(d));
      for (int i = 0; i < d; ++i) {
        A[static_cast<std::size_t>(i)] =
            K.ineqs[static_cast<std::size_t>(pick[static_cast<std::size_t>(i)])].normal;
        b[static_cast<std::size_t>(i)] =
            K.ineqs[static_cast<std::size_t>(pick[static_cast<std::size_t>(i)])].offset;
      }
      std::vector<double> x;
      if (!detail::solve_linear(A, b, x)) return;
      if (!K.contains(x, tol)) return;
      for (const auto& v : verts) {
        double dist = 0;
        for (int i = 0; i < d; ++i)
          dist = std::max(dist, std::fabs(v[static_cast<std::size_t>(i)] -
                                          x[static_cast<std::size_t>(i)]));
        if (dist < 1e-7) return;  // duplicate
      }
      verts.push_back(std::move(x));
      return;
    }
    for (int i = start; i < m; ++i) {
      pick[static_cast<std::size_t>(depth)] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return verts;
}

namespace detail {

// Volume of the convex hull of `verts` (vertices of an H-polytope whose
// facet structure follows the inequality list), by recursive cone
// decomposition over facets.
inline double hull_volume(const std::vector<std::vector<double>>& verts,
                          const std::vector<Inequality>& ineqs, int dim,
                          double tol = 1e-9) {
  const std::size_t nv = verts.size();
  if (nv < static_cast<std::size_t>(dim) + 1) return 0.0;
  if (dim == 1) {
    double lo = verts[0][0], hi = verts[0][0];
    for (const auto& v : verts) {
      lo = std::min(lo, v[0]);
      hi = std::max(hi, v[0]);
    }
    return hi - lo;
  }
  std::vector<double> centroid(static_cast<std::size_t>(dim), 0.0);
  for (const auto& v : verts)
    for (int i = 0; i < dim; ++i)
      centroid[static_cast<std::size_t>(i)] += v[static_cast<std::size_t>(i)] / double(nv);
  double vol = 0;
  std::set<std::vector<int>> seen;
  for (const auto& q : ineqs) {
    double nn = 0;
    for (double c : q.normal) nn += c * c;
    nn = std::sqrt(nn);
    if (nn < tol) continue;
    std::vector<int> on;
    for (std::size_t vi = 0; vi < nv; ++vi) {
      double s = -q.offset;
      for (int i = 0; i < dim; ++i)
        s += q.normal[static_cast<std::size_t>(i)] *
             verts[vi][static_cast<std::size_t>(i)];
      if (std::fabs(s) <= tol * std::max(1.0, nn)) on.push_back(static_cast<int>(vi));
    }
    if (static_cast<int>(on.size()) < dim) continue;
    auto key = on;
    std::sort(key.begin(), key.end());
    if (!seen.insert(key).second) continue;  // same facet, repeated plane
    // orthonormal basis of the facet hyperplane
    std::vector<std::vector<double>> basis;
    {
      std::vector<double> nunit(q.normal.begin(), q.normal.end());
      for (auto& c : nunit) c /= nn;
      for (int e = 0; e < dim && static_cast<int>(basis.size()) < dim - 1; ++e) {
        std::vector<double> cand(static_cast<std::size_t>(dim), 0.0);
        cand[static_cast<std::size_t>(e)] = 1.0;
        double dp = 0;
        for (int i = 0; i < dim; ++i) dp += cand[static_cast<std::size_t>(i)] * nunit[static_cast<std::size_t>(i)];
        for (int i = 0; i < dim; ++i) cand[static_cast<std::size_t>(i)] -= dp * nunit[static_cast<std::size_t>(i)];
        for (const auto& bvec : basis) {
          double d2 = 0;
          for (int i = 0; i < dim; ++i) d2 += cand[static_cast<std::size_t>(i)] * bvec[static_cast<std::size_t>(i)];
          for (int i = 0; i < dim; ++i) cand[static_cast<std::size_t>(i)] -= d2 * bvec[static_cast<std::size_t>(i)];
        }
        double cn = 0;
        for (double c : cand) cn += c * c;
        cn = std::sqrt(cn);
        if (cn > 1e-7) {
          for (auto& c : cand) c /= cn;
          basis.push_back(std::move(cand));
        }
      }
      if (static_cast<int>(basis.size()) != dim - 1) continue;
    }
    const auto& origin = verts[static_cast<std::size_t>(on[0])];
    std::vector<std::vector<double>> fverts;
    for (int vi : on) {
      std::vector<double> y(static_cast<std::size_t>(dim - 1), 0.0);
      for (int bidx = 0; bidx < dim - 1; ++bidx)
        for (int i = 0; i < dim; ++i)
          y[static_cast<std::size_t>(bidx)] +=
              basis[static_cast<std::size_t>(bidx)][static_cast<std::size_t>(i)] *
              (verts[static_cast<std::size_t>(vi)][static_cast<std::size_t>(i)] -
               origin[static_cast<std::size_t>(i)]);
      fverts.push_back(std::move(y));
    }
    // transformed inequalities
    std::vector<Inequality> fineqs;
    for (const auto& r : ineqs) {
      Inequality t;
      t.normal.assign(static_cast<std::size_t>(dim - 1), 0.0);
      double off = r.offset;
      for (int i = 0; i < dim; ++i)
        off -= r.normal[static_cast<std::size_t>(i)] * origin[static_cast<std::size_t>(i)];
      for (int bidx = 0; bidx < dim - 1; ++bidx)
        for (int i = 0; i < dim; ++i)
          t.normal[static_cast<std::size_t>(bidx)] +=
              r.normal[static_cast<std::size_t>(i)] *
              basis[static_cast<std::size_t>(bidx)][static_cast<std::size_t>(i)];
      t.offset = off;
      fineqs.push_back(std::move(t));
    }
    const double fvol = hull_volume(fverts, fineqs, dim - 1, tol);
    double dist = -q.offset;
    for (int i = 0; i < dim; ++i)
      dist += q.normal[static_cast<std::size_t>(i)] * centroid[static_cast<std::size_t>(i)];
    vol += fvol * std::fabs(dist) / (nn * dim);
  }
  return vol;
}

}  // namespace detail

inline VolumeEstimate volume_exact(const HalfspacePolytope& K, int kp) {
  if (K.dim > 4) throw DimensionTooLarge("exact volume only up to kp = 5");
  const auto verts = enumerate_vertices(K);
  if (verts.empty()) throw DegeneratePolytope("no vertices found");
  VolumeEstimate v;
  v.volume = detail::hull_volume(verts, K.ineqs, K.dim);
  v.ci_halfwidth = 0;
  v.c_star_optimal = std::ldexp(v.volume, kp);
  return v;
}

}  // namespace cpb
