#pragma once

#include <functional>
#include <vector>

#include "hjbvem/basis.hpp"
#include "hjbvem/geometry.hpp"
#include "hjbvem/linalg.hpp"
#include "hjbvem/mesh.hpp"

namespace hjbvem::element {

enum class Family { conforming, nonconforming };

Family family_from_string(const std::string& s);
std::string to_string(Family f);

enum class DofKind {
  vertex_value,
  vertex_grad_x,  // scaled by the vertex length gauge
  vertex_grad_y,
  edge_value_moment,   // (1/h_e) int_e v
  edge_normal_moment,  // int_e dv/dn, n outward for the owning cell
};

struct DofDescriptor {
  DofKind kind;
  int entity;  // local vertex or local edge index
};

// Everything the element construction needs to know about one cell. The edge
// data is cell-local: normals point outward, tangents follow the CCW
// traversal.
struct ElementGeometry {
  std::vector<Vec2> verts;
  Vec2 centroid;
  double area = 0.0;
  double diameter = 0.0;
  double perimeter = 0.0;
  std::vector<double> h_vertex;
  std::vector<double> edge_length;
  std::vector<Vec2> edge_normal;
  std::vector<Vec2> edge_tangent;

  int num_vertices() const { return static_cast<int>(verts.size()); }

  // Standalone cell; the vertex gauge defaults to the cell diameter.
  static ElementGeometry from_polygon(std::vector<Vec2> verts, std::vector<double> h_vertex = {});
  static ElementGeometry from_mesh(const mesh::PolygonalMesh& mesh, int c);
};

std::vector<DofDescriptor> dof_layout(int num_vertices, Family family);

// Order-2 virtual element operators on one cell. Matrices act on the local
// DOF vector; polynomial outputs are coefficient vectors in the scaled
// monomial basis of degree 2 (or the constant / vector-linear subsets).
struct LocalElement {
  Family family;
  int n_dofs = 0;
  double lambda = 0.0;
  double area = 0.0;
  double s_k = 0.0;            // stabilization weight (h^-2 + 2 lambda + lambda^2 h^2)
  linalg::Matrix D;            // n_dofs x 6: DOFs of the monomials
  linalg::Matrix P_H;          // 6 x n_dofs: H2-seminorm projector onto P2
  linalg::Matrix P0_hess;      // 3 x n_dofs: cell average of the Hessian (xx, xy, yy)
  linalg::Matrix P0_grad;      // 2 x n_dofs: cell average of the gradient
  std::vector<double> P0_val;  // n_dofs: cell average of the value
  linalg::Matrix P1_grad;      // 6 x n_dofs: linear gradient projection (x coeffs, then y)
  linalg::Matrix S;            // n_dofs x n_dofs: s_k (I - D P_H)^T (I - D P_H)
  std::vector<double> lop;     // n_dofs: trace(P0_hess) - lambda P0_val
  std::vector<double> moments; // cell integrals of the 6 monomials

  // The value projector at this order coincides with the H2 projector.
  const linalg::Matrix& P_val() const { return P_H; }
};

LocalElement build_element(const ElementGeometry& geom, Family family, double lambda);

// DOF vector of a degree-2 polynomial given by monomial coefficients.
std::vector<double> dofs_of_polynomial(const ElementGeometry& geom, Family family,
                                       const std::vector<double>& coeffs);

// DOF interpolant of a smooth function; edge moments are evaluated with
// Gauss rules of the given exactness order.
std::vector<double> interpolate(const ElementGeometry& geom, Family family,
                                const std::function<double(const Vec2&)>& f,
                                const std::function<Vec2(const Vec2&)>& grad_f, int quad_order = 8);

}  // namespace hjbvem::element
