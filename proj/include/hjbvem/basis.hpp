#pragma once

#include <span>
#include <utility>
#include <vector>

#include "hjbvem/geometry.hpp"

namespace hjbvem::basis {

// Scaled monomials ((x - center)/scale)^beta up to total degree `degree`,
// ordered by total degree and, within a degree, by descending first exponent:
// 1; X, Y; X^2, XY, Y^2; ... The same ordering is used everywhere.
struct MonomialBasis {
  Vec2 center;
  double scale = 1.0;
  int degree = 0;

  MonomialBasis(Vec2 c, double s, int d);

  int size() const { return (degree + 1) * (degree + 2) / 2; }
  static int size_for(int degree) { return (degree + 1) * (degree + 2) / 2; }
  // Exponent pair (i, j) of basis member m.
  static std::pair<int, int> exponents(int m);

  std::vector<double> eval(const Vec2& p) const;
  std::vector<Vec2> eval_gradient(const Vec2& p) const;
  std::vector<SymMat2> eval_hessian(const Vec2& p) const;
};

struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int exactness = 0;

  double weight_sum() const;
};

// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights);

// Rule on the segment [a, b] exact for polynomial traces of degree `order`,
// weights carrying the arclength measure.
QuadratureRule edge_quadrature(const Vec2& a, const Vec2& b, int order);

// Rule on a polygon, built by fanning triangles from the centroid and mapping
// a collapsed tensor Gauss rule (positive weights) to each triangle. Requires
// the polygon to be star-shaped with respect to its centroid; throws
// std::domain_error otherwise.
QuadratureRule cell_quadrature(std::span<const Vec2> polygon, int order);

// Integrals of every member of `mb` over the polygon, computed exactly via
// the divergence theorem and edgewise Gauss quadrature.
std::vector<double> exact_cell_moments(std::span<const Vec2> polygon, const MonomialBasis& mb);

// Area centroid and area of a simple polygon (positive for CCW orientation).
double polygon_area(std::span<const Vec2> polygon);
Vec2 polygon_centroid(std::span<const Vec2> polygon);
double polygon_diameter(std::span<const Vec2> polygon);

}  // namespace hjbvem::basis
