#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "cpb/cells.hpp"
#include "presets.hpp"

using cpb::Half;
using cpb::PhasePoint;
using Catch::Matchers::WithinAbs;

namespace {
constexpr double kPi = 3.14159265358979323846;

// A circular 4-gon with prescribed first two arcs (delta_1, r_1, delta_2,
// r_2): the remaining radii solve the 2x2 closure system once delta_3 is
// chosen; scan delta_3 for a solution with positive, pairwise-distinct radii.
cpb::CircularPolygon<double> fourgon_with(double d1, double r1, double d2,
                                          double r2) {
  const double rest = 2 * kPi - d1 - d2;
  for (int i = 1; i < 200; ++i) {
    const double d3 = rest * i / 200.0;
    const double d4 = rest - d3;
    const double b1 = d1, b2 = d1 + d2, b3 = b2 + d3, b4 = 2 * kPi;
    auto w = [](double a, double b) {
      return cpb::Vec2<double>{std::cos(b) - std::cos(a),
                               std::sin(b) - std::sin(a)};
    };
    const auto w1 = w(0, b1), w2 = w(b1, b2), w3 = w(b2, b3), w4 = w(b3, b4);
    const cpb::Vec2<double> c{-(r1 * w1.x + r2 * w2.x),
                              -(r1 * w1.y + r2 * w2.y)};
    const double det = w3.x * w4.y - w3.y * w4.x;
    if (std::fabs(det) < 1e-9) continue;
    const double r3 = (c.x * w4.y - c.y * w4.x) / det;
    const double r4 = (w3.x * c.y - w3.y * c.x) / det;
    if (r3 < 1e-6 || r4 < 1e-6) continue;
    if (std::fabs(r3 - r2) < 1e-6 || std::fabs(r4 - r3) < 1e-6 ||
        std::fabs(r4 - r1) < 1e-6)
      continue;
    return cpb::build_polygon<double>({r1, r2, r3, r4}, {d1, d2, d3, d4});
  }
  FAIL("no closing 4-gon found");
  throw std::runtime_error("unreachable");
}
}  // namespace

TEST_CASE("segment intersections") {
  auto e = squared_pseudo_ellipse();
  const auto x = cpb::segment_intersection(e, 0, 1.0, 3.0);
  CHECK_THAT(x.theta, WithinAbs(kPi / 16, 1e-15));
  CHECK_THAT(x.phi, WithinAbs(kPi / 8, 1e-15));

  // left-side corner: s = 0
  const auto l = cpb::segment_intersection(e, 1, 0.0, 7.0);
  CHECK_THAT(l.phi, WithinAbs(e.arc(1).a, 1e-15));
  CHECK_THAT(l.theta, WithinAbs(e.central_angle(1) / 14, 1e-15));

  // s = t puts phi at the midpoint regardless of the value
  for (double s : {1.0, 2.5, 40.0}) {
    const auto m = cpb::segment_intersection(e, 2, s, s);
    CHECK_THAT(m.phi, WithinAbs(e.arc(2).a + e.central_angle(2) / 2, 1e-12));
  }

  CHECK_THROWS_AS(cpb::segment_intersection(e, 0, 0.0, 0.0),
                  cpb::EmptyIntersection);
}

TEST_CASE("quad corners match the closed forms") {
  for (const auto& poly :
       {squared_pseudo_ellipse(), moss_egg_unit(), sixgon_sample()})
    for (int j = 0; j < poly.size(); ++j) {
      const double d = poly.central_angle(j);
      for (long long n : {2, 3, 17, 100, 200}) {
        const auto q = cpb::quad(poly, j, n);
        CHECK_THAT(q.bl.theta, WithinAbs(d / (2 * n), 1e-12));
        CHECK_THAT(q.br.theta, WithinAbs(d / (2 * n + 2), 1e-12));
        CHECK_THAT(q.tr.theta, WithinAbs(d / (2 * n), 1e-12));
        CHECK_THAT(q.tl.theta, WithinAbs(d / (2 * n - 2), 1e-12));
        CHECK_THAT(q.theta_min, WithinAbs(d / (2 * n + 2), 1e-12));
        CHECK_THAT(q.theta_max, WithinAbs(d / (2 * n - 2), 1e-12));
        const auto qm = cpb::quad(poly, j, n, Half::minus);
        CHECK_THAT(qm.tl.theta, WithinAbs(d / (2 * n - 1), 1e-12));
      }
    }
  CHECK_THROWS_AS(cpb::quad(squared_pseudo_ellipse(), 0, 1), cpb::InvalidN);
}

TEST_CASE("quads shrink to the singularity as n grows") {
  auto e = squared_pseudo_ellipse();
  const auto q = cpb::quad(e, 0, 5000);
  CHECK(q.theta_max < 1e-3);
  CHECK(std::fabs(q.br.phi - e.arc(0).a) < 1e-3);
}

TEST_CASE("chi per arc") {
  CHECK(cpb::compute_chi(squared_pseudo_ellipse()) ==
        std::vector<long long>{2, 2, 2, 2});
  CHECK(cpb::compute_chi(moss_egg_unit()) ==
        std::vector<long long>{3, 2, 2, 2});
  for (const auto& poly :
       {squared_pseudo_ellipse(), moss_egg_unit(), sixgon_sample()})
    for (long long c : cpb::compute_chi(poly)) CHECK(c >= 2);
}

TEST_CASE("admissible pair windows") {
  auto e = squared_pseudo_ellipse();
  const auto chi = cpb::compute_chi(e);
  CHECK(cpb::admissible_pairs(e, 0, 20, false, chi) ==
        std::vector<long long>{22, 23, 24, 25});
  CHECK(cpb::admissible_pairs(e, 0, 20, true, chi) ==
        std::vector<long long>{23, 24, 25});
  CHECK(cpb::admissible_pairs(e, 0, 10, false, chi).empty());

  for (const auto& poly :
       {squared_pseudo_ellipse(), moss_egg_unit(), sixgon_sample()}) {
    const auto pchi = cpb::compute_chi(poly);
    for (int j = 0; j < poly.size(); ++j)
      for (long long n = pchi[j]; n <= 200; ++n) {
        const auto strict = cpb::admissible_pairs(poly, j, n, true, pchi);
        const auto loose = cpb::admissible_pairs(poly, j, n, false, pchi);
        for (long long v : strict)
          CHECK(std::find(loose.begin(), loose.end(), v) != loose.end());
      }
  }
}

TEST_CASE("factor telescoping") {
  for (const auto& poly :
       {squared_pseudo_ellipse(), moss_egg_unit(), sixgon_sample()}) {
    double prod_plus = 1, prod_minus = 1;
    for (int j = 0; j < poly.size(); ++j) {
      const auto ab = cpb::alpha_beta(poly, j);
      CHECK(ab.alpha_minus > 0);
      CHECK(ab.alpha_minus < ab.alpha_plus);
      prod_plus *= ab.alpha_plus;
      prod_minus *= ab.alpha_minus;
    }
    CHECK(prod_plus > 1);
    CHECK_THAT(prod_plus * prod_minus, WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("stretching inequalities hold throughout the windows") {
  for (const auto& poly :
       {squared_pseudo_ellipse(), moss_egg_unit(), sixgon_sample()}) {
    const auto chi = cpb::compute_chi(poly);
    for (int j = 0; j < poly.size(); ++j)
      for (long long n = chi[j]; n <= 100; ++n)
        for (long long np : cpb::admissible_pairs(poly, j, n, false, chi)) {
          CHECK(cpb::stretching_inequalities_hold(poly, j, n, np,
                                                  Half::minus));
          CHECK(cpb::stretching_inequalities_hold(poly, j, n, np, Half::plus));
        }
  }
}

TEST_CASE("constant theta along the integer edges") {
  // points on the n and n-1 slant segments keep theta through all n steps;
  // for the n-1 edge the last step starts at the node, so it stays on the
  // next arc only once 2 theta <= delta_{j+1}
  for (const auto& poly : {squared_pseudo_ellipse(), moss_egg_unit()}) {
    for (int j = 0; j < poly.size(); ++j)
      for (long long n : {3, 11, 40}) {
        for (double s : {0.0, 0.25, 0.8, 1.0}) {
          for (double edge : {double(n), double(n - 1)}) {
            const auto x = cpb::segment_intersection(poly, j, s, edge);
            if (2 * x.theta > poly.central_angle(j + 1)) continue;
            const auto y = cpb::advance_steps(poly, x, n);
            CHECK_THAT(y.theta, WithinAbs(x.theta, 1e-10));
          }
        }
      }
  }
}

TEST_CASE("half-segment transition bound") {
  for (const auto& poly : {squared_pseudo_ellipse(), moss_egg_unit()}) {
    for (int j = 0; j < poly.size(); ++j) {
      const double mu = poly.mu(j);
      const double d = poly.central_angle(j);
      for (long long n : {5, 12, 33}) {
        if (n < cpb::compute_chi(poly)[j]) continue;
        for (double s : {0.05, 0.4, 0.95}) {
          const auto x = cpb::segment_intersection(poly, j, s, n - 0.5);
          const auto y = cpb::advance_steps(poly, x, n);
          if (mu < 1)
            CHECK(y.theta < mu * d / (2 * n - 1));
          else
            CHECK(y.theta > mu * d / (2 * n + 1));
        }
      }
    }
  }
}

TEST_CASE("stretching: figure configuration") {
  // delta_1 = pi/2, delta_2 = 1, mu_1 = 0.3, n = 3, n' = 4
  auto poly = fourgon_with(kPi / 2, 1.0, 1.0, 1.0 / 0.09);
  CHECK_THAT(poly.mu(0), WithinAbs(0.3, 1e-12));
  cpb::StretchOptions opt;
  opt.n_paths = 100;
  opt.samples = 512;
  opt.seed = 31;
  for (Half from : {Half::minus, Half::plus})
    for (Half to : {Half::minus, Half::plus}) {
      const auto rep = cpb::verify_stretching(poly, 0, 3, 4, from, to, opt);
      INFO("from " << cpb::half_to_char(from) << " to "
                   << cpb::half_to_char(to));
      CHECK(rep.success_fraction == 1.0);
      REQUIRE_FALSE(rep.witnesses.empty());
      CHECK(rep.witnesses[0].u1 != rep.witnesses[0].u2);
    }
}

TEST_CASE("stretching on the squared pseudo-ellipse") {
  auto e = squared_pseudo_ellipse();
  cpb::StretchOptions opt;
  opt.n_paths = 200;
  opt.samples = 1024;
  opt.seed = 7;
  const auto rep =
      cpb::verify_stretching(e, 0, 20, 23, Half::minus, Half::plus, opt);
  CHECK(rep.success_fraction == 1.0);
  CHECK(rep.paths_total == 200);

  // far outside the cone: rejected before any sampling
  CHECK_THROWS_AS(
      cpb::verify_stretching(e, 0, 20, 60, Half::minus, Half::plus, opt),
      cpb::NotAdmissiblePair);
}
