#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <functional>
#include <random>

#include "cpb/counting.hpp"
#include "presets.hpp"

using cpb::BigInt;
using cpb::SymbolicParams;
using Catch::Matchers::WithinAbs;

namespace {

// Enumeration oracle, no dynamic programme: depth-first over the slots with
// the chain windows, wraparound and sum checked at the leaf.
BigInt brute_Gq(const SymbolicParams& sp, int p, long long q) {
  const int slots = sp.k * p;
  BigInt total = 0;
  std::vector<long long> x(static_cast<std::size_t>(slots));
  std::function<void(int, long long)> rec = [&](int s, long long sum) {
    if (s == slots) {
      if (sum == q && cpb::chains(sp, sp.k - 1, x[static_cast<std::size_t>(slots - 1)], x[0]))
        ++total;
      return;
    }
    cpb::detail::IntInterval w;
    if (s == 0)
      w = {sp.chi[0], q};
    else
      w = cpb::forward_window(sp, (s - 1) % sp.k,
                              x[static_cast<std::size_t>(s - 1)],
                              sp.chi[s % sp.k]);
    for (long long v = w.lo; v <= w.hi; ++v) {
      if (sum + v > q) break;
      x[static_cast<std::size_t>(s)] = v;
      rec(s + 1, sum + v);
    }
  };
  rec(0, 0);
  return total;
}

}  // namespace

TEST_CASE("polytope shape and membership") {
  auto e = squared_pseudo_ellipse();
  const auto sp = SymbolicParams::from_polygon_geometric(e);
  const auto P = cpb::polytope_P(sp, 1);
  CHECK(P.dim == 4);
  CHECK(P.ineqs.size() == 12);

  auto member = [&](std::vector<double> x) { return P.contains(x); };
  CHECK(member({20, 23, 27, 31}) ==
        (cpb::chains(sp, 0, 20, 23) && cpb::chains(sp, 1, 23, 27) &&
         cpb::chains(sp, 2, 27, 31) && cpb::chains(sp, 3, 31, 20)));
  CHECK_FALSE(member({20, 23, 27, 1}));   // floor violated
  CHECK_FALSE(member({20, 60, 70, 90}));  // sandwich violated

  const auto P2 = cpb::polytope_P(sp, 2);
  CHECK(P2.dim == 8);
  CHECK(P2.ineqs.size() == 24);
}

TEST_CASE("lattice point counts match enumeration") {
  auto e = squared_pseudo_ellipse();
  const auto sp = SymbolicParams::from_polygon_geometric(e);
  for (long long q = 9; q <= 120; q += (q < 40 ? 1 : 7))
    CHECK(cpb::count_Gq(sp, 1, q) == brute_Gq(sp, 1, q));
  for (long long q = 17; q <= 60; q += (q < 30 ? 1 : 5))
    CHECK(cpb::count_Gq(sp, 2, q) == brute_Gq(sp, 2, q));

  // below any feasible sum the slice is empty
  CHECK(cpb::count_Gq(sp, 1, 8) == 0);
}

TEST_CASE("feasible q become contiguous past the polytope tip") {
  auto e = squared_pseudo_ellipse();
  const auto sp = SymbolicParams::from_polygon_geometric(e);
  long long first = 0, last_gap = 0;
  for (long long q = 2; q <= 300; ++q) {
    const bool feasible = cpb::count_Gq(sp, 1, q) > 0;
    if (feasible && first == 0) first = q;
    if (!feasible && first != 0) last_gap = q;
  }
  CHECK(first == 62);
  // a few integer gaps right at the tip, none afterwards
  CHECK(last_gap == 69);
}

TEST_CASE("weak compositions") {
  CHECK(cpb::weak_compositions(2, 2, 2) == 3);
  CHECK(cpb::weak_compositions(2, 2, -1) == 0);
  CHECK(cpb::weak_compositions(2, 2, 5) == 0);
  for (int n = 1; n <= 6; ++n)
    for (int m = 1; m <= 6; ++m) {
      // unimodal with the mode at floor(nm/2), and at least (m+1)^n/(nm+1)
      const long long mode = n * m / 2;
      BigInt prev = 0;
      for (long long s = 0; s <= mode; ++s) {
        const BigInt c = cpb::weak_compositions(n, m, s);
        CHECK(c >= prev);
        prev = c;
      }
      for (long long s = mode; s <= static_cast<long long>(n) * m; ++s) {
        const BigInt c = cpb::weak_compositions(n, m, s);
        CHECK(c <= prev);
        prev = c;
      }
      const double peak =
          cpb::weak_compositions(n, m, mode).convert_to<double>();
      CHECK(peak >= std::pow(m + 1.0, n) / (n * m + 1) - 1e-9);
    }
}

TEST_CASE("lambert W") {
  CHECK(cpb::lambert_w0(0.0) == 0.0);
  CHECK_THAT(cpb::lambert_w0(std::exp(1.0)), WithinAbs(1.0, 1e-14));
  CHECK_THAT(cpb::lambert_w0(1.0), WithinAbs(0.5671432904097838, 1e-12));
  for (int i = 0; i <= 1000; ++i) {
    const double x = 1000.0 * i / 1000.0;
    const double w = cpb::lambert_w0(x);
    CHECK(std::fabs(w * std::exp(w) - x) <= 1e-12 * std::max(1.0, x));
  }
  CHECK_THROWS_AS(cpb::lambert_w0(-1.0), cpb::DomainError);
}

TEST_CASE("bound constants") {
  for (const auto& poly :
       {squared_pseudo_ellipse(), moss_egg_unit(), sixgon_sample()}) {
    const auto sp = SymbolicParams::from_polygon_geometric(poly);
    const auto c = cpb::bound_constants(sp, 1);
    CHECK(c.a_star > 0);
    CHECK(c.a_star < 4);
    CHECK(c.h_star > 0);
    CHECK(c.h_star < c.a_star / std::exp(1.0));
    CHECK(c.x_star > 0);
    CHECK(c.M_star > 0);
    CHECK(c.c_star_of_p > 0);
    CHECK(c.A_j[0] == 1.0);
  }
}

TEST_CASE("lower bound holds on a window") {
  auto e = squared_pseudo_ellipse();
  const auto sp = SymbolicParams::from_polygon_geometric(e);
  const auto rep = cpb::check_lower_bounds(sp, 1, 260);
  CHECK_FALSE(rep.rows.empty());
  for (const auto& row : rep.rows) CHECK(row.scaled_count >= row.bound);
  CHECK(std::fabs(rep.grid_argmax - rep.constants.x_star) <= rep.grid_cell);
}

TEST_CASE("contained cube") {
  auto e = squared_pseudo_ellipse();
  const auto sp = SymbolicParams::from_polygon_geometric(e);
  const auto cube = cpb::cube_in_polytope(sp, 1, 400);
  double sum = 0;
  for (double o : cube.center) sum += o;
  CHECK_THAT(sum, WithinAbs(400.0, 1e-9));
  CHECK(cube.t_star > 0);

  const auto P = cpb::polytope_P(sp, 1);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100000; ++i) {
    std::vector<double> x(cube.center);
    for (auto& v : x) v += cube.t_star * 0.999 * u(rng);
    CHECK(P.contains(x));
  }

  CHECK_THROWS_AS(cpb::cube_in_polytope(sp, 1, 30), cpb::EmptyCube);
}

TEST_CASE("wills bound") {
  const auto box = cpb::LatticeShape::box({1.0, 1.0});
  const auto r3 = cpb::wills_check(box, {3.0});
  REQUIRE(r3.size() == 1);
  CHECK(r3[0].count == 16);
  CHECK_THAT(r3[0].bound, WithinAbs(std::pow(3 - std::sqrt(2.0), 2), 1e-12));

  const auto simplex2 = cpb::LatticeShape::simplex(2);
  const auto s4 = cpb::wills_check(simplex2, {4.0});
  REQUIRE(s4.size() == 1);
  CHECK(s4[0].count == 15);  // C(6, 2)

  for (int n = 1; n <= 3; ++n) {
    std::vector<double> grid;
    for (int i = 0; i < 50; ++i) grid.push_back(1.0 + 0.7 * i);
    std::vector<double> sides(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) sides[static_cast<std::size_t>(i)] = 0.8 + 0.4 * i;
    CHECK_NOTHROW(cpb::wills_check(cpb::LatticeShape::box(sides), grid));
    CHECK_NOTHROW(cpb::wills_check(cpb::LatticeShape::simplex(n), grid));
  }
}

TEST_CASE("limit polytope volume") {
  auto e = squared_pseudo_ellipse();
  const auto sp = SymbolicParams::from_polygon_geometric(e);
  const auto K = cpb::limit_polytope(sp, 1);
  CHECK(K.dim == 3);

  const auto exact = cpb::volume_exact(K, 4);
  CHECK(exact.volume > 0);
  const auto mc = cpb::volume_monte_carlo(K, 4, 10000000, 20240810);
  CHECK_THAT(mc.volume, WithinAbs(exact.volume, 5e-3 * exact.volume + 3 * mc.ci_halfwidth));
  CHECK_THAT(mc.c_star_optimal, WithinAbs(16 * mc.volume, 1e-12));

  // every counted configuration, scaled by q, lies in the closed limit
  for (long long q : {60, 90}) {
    const int slots = 4;
    std::vector<long long> x(slots);
    std::function<void(int, long long)> rec = [&](int s, long long sum) {
      if (s == slots) {
        if (sum != q || !cpb::chains(sp, 3, x[3], x[0])) return;
        std::vector<double> y(3);
        for (int i = 0; i < 3; ++i) y[static_cast<std::size_t>(i)] = double(x[static_cast<std::size_t>(i)]) / double(q);
        CHECK(K.contains(y, 1e-12));
        return;
      }
      auto w = s == 0 ? cpb::detail::IntInterval{sp.chi[0], q}
                      : cpb::forward_window(sp, s - 1, x[static_cast<std::size_t>(s - 1)], sp.chi[s % 4]);
      for (long long v = w.lo; v <= w.hi && sum + v <= q; ++v) {
        x[static_cast<std::size_t>(s)] = v;
        rec(s + 1, sum + v);
      }
    };
    rec(0, 0);
  }

  // a nearly collapsed sandwich leaves almost no volume
  SymbolicParams thin = sp;
  for (int j = 0; j < 4; ++j) {
    thin.alpha_minus[j] = 0.999;
    thin.alpha_plus[j] = 1.001;
  }
  const auto vthin = cpb::volume_exact(cpb::limit_polytope(thin, 1), 4);
  CHECK(vthin.volume < 1e-6);

  CHECK_THROWS_AS(cpb::volume_exact(cpb::limit_polytope(sp, 2), 8),
                  cpb::DimensionTooLarge);
}

TEST_CASE("counts approach the limit volume") {
  auto e = squared_pseudo_ellipse();
  const auto sp = SymbolicParams::from_polygon_geometric(e);
  const auto K = cpb::limit_polytope(sp, 1);
  const double V = cpb::volume_exact(K, 4).volume;
  // the deficit is O(1/q); the doubled-q sequence must increase and its
  // Richardson extrapolation land within 10% of the volume
  std::vector<double> ratio;
  for (long long q : {200, 400, 800})
    ratio.push_back(cpb::count_Gq(sp, 1, q).convert_to<double>() /
                    (V * double(q) * double(q) * double(q)));
  CHECK(ratio[0] < ratio[1]);
  CHECK(ratio[1] < ratio[2]);
  CHECK(ratio[2] < 1.0 + 1e-9);
  const double extrapolated = 2 * ratio[2] - ratio[1];
  CHECK_THAT(extrapolated, WithinAbs(1.0, 0.1));
}
