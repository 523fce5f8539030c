#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hjbvem/basis.hpp"

using namespace hjbvem;
using basis::MonomialBasis;

namespace {
const std::vector<Vec2> unit_square{{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
}

TEST_CASE("monomials are enumerated in graded lexicographic order") {
  CHECK(MonomialBasis::exponents(0) == std::pair<int, int>{0, 0});
  CHECK(MonomialBasis::exponents(1) == std::pair<int, int>{1, 0});
  CHECK(MonomialBasis::exponents(2) == std::pair<int, int>{0, 1});
  CHECK(MonomialBasis::exponents(3) == std::pair<int, int>{2, 0});
  CHECK(MonomialBasis::exponents(4) == std::pair<int, int>{1, 1});
  CHECK(MonomialBasis::exponents(5) == std::pair<int, int>{0, 2});
}

TEST_CASE("monomial values, gradients and Hessians agree at a sample point") {
  MonomialBasis mb({0.5, 0.25}, 2.0, 2);
  Vec2 p{1.5, 0.75};
  const double X = (p.x - 0.5) / 2.0;  // 0.5
  const double Y = (p.y - 0.25) / 2.0;  // 0.25
  auto v = mb.eval(p);
  CHECK(v[0] == doctest::Approx(1.0));
  CHECK(v[1] == doctest::Approx(X));
  CHECK(v[2] == doctest::Approx(Y));
  CHECK(v[3] == doctest::Approx(X * X));
  CHECK(v[4] == doctest::Approx(X * Y));
  CHECK(v[5] == doctest::Approx(Y * Y));

  auto g = mb.eval_gradient(p);
  CHECK(g[1].x == doctest::Approx(0.5));
  CHECK(g[1].y == doctest::Approx(0.0));
  CHECK(g[4].x == doctest::Approx(Y / 2.0));
  CHECK(g[4].y == doctest::Approx(X / 2.0));
  CHECK(g[5].y == doctest::Approx(2.0 * Y / 2.0));

  auto h = mb.eval_hessian(p);
  CHECK(h[3].xx == doctest::Approx(2.0 / 4.0));
  CHECK(h[3].yy == doctest::Approx(0.0));
  CHECK(h[4].xy == doctest::Approx(1.0 / 4.0));
  CHECK(h[5].yy == doctest::Approx(2.0 / 4.0));
}

TEST_CASE("Gauss-Legendre nodes integrate high-degree monomials") {
  std::vector<double> x, w;
  basis::gauss_legendre_01(3, x, w);
  double s5 = 0.0, s0 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s5 += w[i] * std::pow(x[i], 5);
    s0 += w[i];
  }
  CHECK(s0 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s5 == doctest::Approx(1.0 / 6.0).epsilon(1e-13));

  basis::gauss_legendre_01(12, x, w);
  double s23 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s23 += w[i] * std::pow(x[i], 23);
  CHECK(s23 == doctest::Approx(1.0 / 24.0).epsilon(1e-12));
}

TEST_CASE("edge quadrature carries arclength weights") {
  Vec2 a{1.0, 2.0}, b{4.0, 6.0};  // length 5
  auto rule = basis::edge_quadrature(a, b, 5);
  CHECK(rule.weight_sum() == doctest::Approx(5.0).epsilon(1e-13));
  // integral of x along the segment: parametrize x = 1 + 3t, ds = 5 dt.
  double s = 0.0;
  for (std::size_t i = 0; i < rule.points.size(); ++i) s += rule.weights[i] * rule.points[i].x;
  CHECK(s == doctest::Approx(5.0 * (1.0 + 1.5)).epsilon(1e-13));
}

TEST_CASE("cell quadrature integrates polynomials on polygons") {
  auto rule = basis::cell_quadrature(unit_square, 6);
  double area = 0.0, sx = 0.0, sxy = 0.0, sx3y3 = 0.0;
  for (std::size_t i = 0; i < rule.points.size(); ++i) {
    const Vec2& p = rule.points[i];
    const double w = rule.weights[i];
    CHECK(w > 0.0);
    area += w;
    sx += w * p.x;
    sxy += w * p.x * p.y;
    sx3y3 += w * std::pow(p.x, 3) * std::pow(p.y, 3);
  }
  CHECK(area == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(sx == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(sxy == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(sx3y3 == doctest::Approx(1.0 / 16.0).epsilon(1e-12));
}

TEST_CASE("cell quadrature rejects polygons not star-shaped around the centroid") {
  // A thin U shape whose centroid sees the opening only through the notch.
  std::vector<Vec2> u_shape{{0.0, 0.0}, {5.0, 0.0}, {5.0, 5.0}, {4.0, 5.0},
                            {4.0, 1.0}, {1.0, 1.0}, {1.0, 5.0}, {0.0, 5.0}};
  CHECK_THROWS_AS(basis::cell_quadrature(u_shape, 2), std::domain_error);
}

TEST_CASE("divergence-theorem moments match quadrature on a hexagon") {
  std::vector<Vec2> hex{{2.0, 0.0}, {1.0, 1.8}, {-1.1, 1.7}, {-2.0, 0.1}, {-0.9, -1.6}, {1.2, -1.7}};
  MonomialBasis mb(basis::polygon_centroid(hex), basis::polygon_diameter(hex), 2);
  auto moments = basis::exact_cell_moments(hex, mb);
  auto rule = basis::cell_quadrature(hex, 4);
  for (int j = 0; j < 6; ++j) {
    double q = 0.0;
    for (std::size_t i = 0; i < rule.points.size(); ++i) q += rule.weights[i] * mb.eval(rule.points[i])[j];
    CHECK(moments[j] == doctest::Approx(q).epsilon(1e-12));
  }
}

TEST_CASE("scaled second moment of the unit square") {
  MonomialBasis mb({0.5, 0.5}, std::sqrt(2.0), 2);
  auto moments = basis::exact_cell_moments(unit_square, mb);
  CHECK(moments[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(moments[1] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(moments[3] == doctest::Approx(1.0 / 24.0).epsilon(1e-13));  // int ((x-1/2)/sqrt2)^2
  CHECK(moments[4] == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("polygon metrics for the unit square") {
  CHECK(basis::polygon_area(unit_square) == doctest::Approx(1.0));
  auto c = basis::polygon_centroid(unit_square);
  CHECK(c.x == doctest::Approx(0.5));
  CHECK(c.y == doctest::Approx(0.5));
  CHECK(basis::polygon_diameter(unit_square) == doctest::Approx(std::sqrt(2.0)));
}
