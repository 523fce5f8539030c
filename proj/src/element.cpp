#include "hjbvem/element.hpp"

#include <cmath>
#include <stdexcept>

namespace hjbvem::element {

using basis::MonomialBasis;
using linalg::Matrix;

Family family_from_string(const std::string& s) {
  if (s == "conforming") return Family::conforming;
  if (s == "nonconforming") return Family::nonconforming;
  throw std::invalid_argument("unknown element family: " + s);
}

std::string to_string(Family f) {
  return f == Family::conforming ? "conforming" : "nonconforming";
}

ElementGeometry ElementGeometry::from_polygon(std::vector<Vec2> verts, std::vector<double> h_vertex) {
  const std::size_t n = verts.size();
  if (n < 3) throw std::invalid_argument("ElementGeometry: fewer than 3 vertices");
  for (std::size_t i = 0; i < n; ++i)
    if ((verts[(i + 1) % n] - verts[i]).norm() == 0.0)
      throw std::invalid_argument("ElementGeometry: repeated consecutive vertex");
  ElementGeometry g;
  g.verts = std::move(verts);
  g.area = basis::polygon_area(g.verts);
  if (!(g.area > 0.0)) throw std::invalid_argument("ElementGeometry: cell is not CCW or has zero area");
  g.centroid = basis::polygon_centroid(g.verts);
  g.diameter = basis::polygon_diameter(g.verts);
  if (h_vertex.empty()) h_vertex.assign(n, g.diameter);
  if (h_vertex.size() != n) throw std::invalid_argument("ElementGeometry: vertex gauge size mismatch");
  g.h_vertex = std::move(h_vertex);
  g.edge_length.resize(n);
  g.edge_normal.resize(n);
  g.edge_tangent.resize(n);
  g.perimeter = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 d = g.verts[(i + 1) % n] - g.verts[i];
    double len = d.norm();
    g.edge_length[i] = len;
    g.edge_tangent[i] = d / len;
    g.edge_normal[i] = Vec2{d.y, -d.x} / len;
    g.perimeter += len;
  }
  return g;
}

ElementGeometry ElementGeometry::from_mesh(const mesh::PolygonalMesh& mesh, int c) {
  const mesh::Cell& cell = mesh.cell(c);
  std::vector<double> gauges(cell.vertices.size());
  for (std::size_t i = 0; i < gauges.size(); ++i)
    gauges[i] = mesh.vertex_length_scale(cell.vertices[i]);
  return from_polygon(mesh.cell_polygon(c), std::move(gauges));
}

std::vector<DofDescriptor> dof_layout(int num_vertices, Family family) {
  std::vector<DofDescriptor> layout;
  if (family == Family::conforming) {
    layout.reserve(3 * num_vertices);
    for (int v = 0; v < num_vertices; ++v) {
      layout.push_back({DofKind::vertex_value, v});
      layout.push_back({DofKind::vertex_grad_x, v});
      layout.push_back({DofKind::vertex_grad_y, v});
    }
  } else {
    layout.reserve(3 * num_vertices);
    for (int v = 0; v < num_vertices; ++v) layout.push_back({DofKind::vertex_value, v});
    for (int e = 0; e < num_vertices; ++e) layout.push_back({DofKind::edge_value_moment, e});
    for (int e = 0; e < num_vertices; ++e) layout.push_back({DofKind::edge_normal_moment, e});
  }
  return layout;
}

namespace {

// Row of the functional v -> (D^2 v, Psi)_K for a constant symmetric Psi,
// expressed on the local DOF vector through the boundary identity
//   (D^2 v, Psi)_K = sum_e [ (n'Psi n) int_e dv/dn + (t'Psi n) (v(b) - v(a)) ].
std::vector<double> hessian_pairing_row(const ElementGeometry& g, Family family, const SymMat2& psi) {
  const int nv = g.num_vertices();
  const int n_dofs = 3 * nv;
  std::vector<double> row(n_dofs, 0.0);
  for (int e = 0; e < nv; ++e) {
    const int a = e;
    const int b = (e + 1) % nv;
    const Vec2& n = g.edge_normal[e];
    const Vec2& t = g.edge_tangent[e];
    const double nPn = psi.quad(n);
    const double tPn = t.x * (psi.xx * n.x + psi.xy * n.y) + t.y * (psi.xy * n.x + psi.yy * n.y);
    if (family == Family::conforming) {
      // dv/dn is linear along the edge; the trapezoid rule is exact.
      const double half = 0.5 * g.edge_length[e] * nPn;
      row[3 * a + 1] += half * n.x / g.h_vertex[a];
      row[3 * a + 2] += half * n.y / g.h_vertex[a];
      row[3 * b + 1] += half * n.x / g.h_vertex[b];
      row[3 * b + 2] += half * n.y / g.h_vertex[b];
      row[3 * b + 0] += tPn;
      row[3 * a + 0] -= tPn;
    } else {
      row[2 * nv + e] += nPn;
      row[b] += tPn;
      row[a] -= tPn;
    }
  }
  return row;
}

// Row of the functional v -> int_e v q ds where q is evaluated along the
// edge; the trace of v is the Hermite cubic (conforming) or the quadratic
// matching endpoint values and the edge mean (nonconforming).
void accumulate_edge_value_row(const ElementGeometry& g, Family family, int e,
                               const std::function<double(const Vec2&)>& q, std::vector<double>& row,
                               double factor) {
  const int nv = g.num_vertices();
  const int a = e;
  const int b = (e + 1) % nv;
  const double L = g.edge_length[e];
  const Vec2& t = g.edge_tangent[e];
  const Vec2& pa = g.verts[a];
  const Vec2& pb = g.verts[b];
  static const double gl3_s[3] = {0.5 - std::sqrt(15.0) / 10.0, 0.5, 0.5 + std::sqrt(15.0) / 10.0};
  static const double gl3_w[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  for (int k = 0; k < 3; ++k) {
    const double s = gl3_s[k];
    const double w = gl3_w[k] * L * factor;
    const Vec2 p = pa + (pb - pa) * s;
    const double qv = q(p);
    if (family == Family::conforming) {
      const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
      const double h10 = s * (1.0 - s) * (1.0 - s);
      const double h01 = s * s * (3.0 - 2.0 * s);
      const double h11 = s * s * (s - 1.0);
      row[3 * a + 0] += w * qv * h00;
      row[3 * b + 0] += w * qv * h01;
      // d/ds = L * (t . grad v) at the endpoints, with the gauge divided out.
      row[3 * a + 1] += w * qv * h10 * L * t.x / g.h_vertex[a];
      row[3 * a + 2] += w * qv * h10 * L * t.y / g.h_vertex[a];
      row[3 * b + 1] += w * qv * h11 * L * t.x / g.h_vertex[b];
      row[3 * b + 2] += w * qv * h11 * L * t.y / g.h_vertex[b];
    } else {
      // mu(s) = va + (6m - 4va - 2vb) s + (3va + 3vb - 6m) s^2
      const double c_va = 1.0 - 4.0 * s + 3.0 * s * s;
      const double c_vb = -2.0 * s + 3.0 * s * s;
      const double c_m = 6.0 * s - 6.0 * s * s;
      row[a] += w * qv * c_va;
      row[b] += w * qv * c_vb;
      row[nv + e] += w * qv * c_m;
    }
  }
}

}  // namespace

LocalElement build_element(const ElementGeometry& g, Family family, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("build_element: lambda must be nonnegative");
  const int nv = g.num_vertices();
  const int n_dofs = 3 * nv;
  const MonomialBasis mb(g.centroid, g.diameter, 2);

  LocalElement el;
  el.family = family;
  el.n_dofs = n_dofs;
  el.lambda = lambda;
  el.area = g.area;
  const double h = g.diameter;
  el.s_k = 1.0 / (h * h) + 2.0 * lambda + lambda * lambda * h * h;
  el.moments = basis::exact_cell_moments(g.verts, mb);

  // D: DOFs of the monomials.
  el.D = Matrix(n_dofs, 6);
  if (family == Family::conforming) {
    for (int v = 0; v < nv; ++v) {
      auto vals = mb.eval(g.verts[v]);
      auto grads = mb.eval_gradient(g.verts[v]);
      for (int j = 0; j < 6; ++j) {
        el.D(3 * v + 0, j) = vals[j];
        el.D(3 * v + 1, j) = g.h_vertex[v] * grads[j].x;
        el.D(3 * v + 2, j) = g.h_vertex[v] * grads[j].y;
      }
    }
  } else {
    std::vector<double> t2, w2;
    basis::gauss_legendre_01(2, t2, w2);
    for (int v = 0; v < nv; ++v) {
      auto vals = mb.eval(g.verts[v]);
      for (int j = 0; j < 6; ++j) el.D(v, j) = vals[j];
    }
    for (int e = 0; e < nv; ++e) {
      const Vec2& pa = g.verts[e];
      const Vec2& pb = g.verts[(e + 1) % nv];
      for (int k = 0; k < 2; ++k) {
        Vec2 p = pa + (pb - pa) * t2[k];
        auto vals = mb.eval(p);
        auto grads = mb.eval_gradient(p);
        for (int j = 0; j < 6; ++j) {
          el.D(nv + e, j) += w2[k] * vals[j];  // (1/L) int_e m  (weights sum to 1)
          el.D(2 * nv + e, j) += w2[k] * g.edge_length[e] * grads[j].dot(g.edge_normal[e]);
        }
      }
    }
  }

  // B: right sides of the projector system applied to the DOF vector.
  Matrix B(6, n_dofs);
  if (family == Family::conforming) {
    for (int v = 0; v < nv; ++v) {
      B(0, 3 * v) = 1.0 / nv;
      B(1, 3 * v + 1) = 1.0 / (nv * g.h_vertex[v]);
      B(2, 3 * v + 2) = 1.0 / (nv * g.h_vertex[v]);
    }
  } else {
    for (int v = 0; v < nv; ++v) B(0, v) = 1.0 / nv;
    // Mean gradient over the boundary, reconstructed from normal moments and
    // tangential endpoint differences.
    for (int e = 0; e < nv; ++e) {
      const int a = e, b = (e + 1) % nv;
      const Vec2& n = g.edge_normal[e];
      const Vec2& t = g.edge_tangent[e];
      B(1, 2 * nv + e) += n.x / g.perimeter;
      B(2, 2 * nv + e) += n.y / g.perimeter;
      B(1, b) += t.x / g.perimeter;
      B(1, a) -= t.x / g.perimeter;
      B(2, b) += t.y / g.perimeter;
      B(2, a) -= t.y / g.perimeter;
    }
  }
  auto hessians = mb.eval_hessian(g.centroid);  // constant over the cell
  for (int c = 0; c < 3; ++c) {
    auto row = hessian_pairing_row(g, family, hessians[3 + c]);
    for (int i = 0; i < n_dofs; ++i) B(3 + c, i) = row[i];
  }

  // G = B D is the exact Gram of the projector system: the boundary formulas
  // in B are exact on quadratic traces, and building G this way makes
  // P_H D = I hold to factorization accuracy.
  Matrix G = B * el.D;
  el.P_H = linalg::dense_solve(G, B);

  // Cell-averaged Hessian from the pairing rows with the unit matrices.
  el.P0_hess = Matrix(3, n_dofs);
  {
    auto rxx = hessian_pairing_row(g, family, SymMat2{1.0, 0.0, 0.0});
    auto rxy = hessian_pairing_row(g, family, SymMat2{0.0, 0.5, 0.0});  // picks out int v_xy
    auto ryy = hessian_pairing_row(g, family, SymMat2{0.0, 0.0, 1.0});
    for (int i = 0; i < n_dofs; ++i) {
      el.P0_hess(0, i) = rxx[i] / g.area;
      el.P0_hess(1, i) = rxy[i] / g.area;
      el.P0_hess(2, i) = ryy[i] / g.area;
    }
  }

  // Cell-averaged gradient: (grad v, e_c)_K = sum_e n_c int_e v.
  el.P0_grad = Matrix(2, n_dofs);
  for (int e = 0; e < nv; ++e) {
    const int a = e, b = (e + 1) % nv;
    const Vec2& n = g.edge_normal[e];
    const double L = g.edge_length[e];
    if (family == Family::conforming) {
      // Hermite integral: int_e v = L/2 (va + vb) + L^2/12 (va' - vb').
      const Vec2& t = g.edge_tangent[e];
      for (int c = 0; c < 2; ++c) {
        double nc = c == 0 ? n.x : n.y;
        el.P0_grad(c, 3 * a) += nc * L / 2.0 / g.area;
        el.P0_grad(c, 3 * b) += nc * L / 2.0 / g.area;
        el.P0_grad(c, 3 * a + 1) += nc * L * L / 12.0 * t.x / g.h_vertex[a] / g.area;
        el.P0_grad(c, 3 * a + 2) += nc * L * L / 12.0 * t.y / g.h_vertex[a] / g.area;
        el.P0_grad(c, 3 * b + 1) -= nc * L * L / 12.0 * t.x / g.h_vertex[b] / g.area;
        el.P0_grad(c, 3 * b + 2) -= nc * L * L / 12.0 * t.y / g.h_vertex[b] / g.area;
      }
    } else {
      el.P0_grad(0, nv + e) += n.x * L / g.area;
      el.P0_grad(1, nv + e) += n.y * L / g.area;
    }
  }

  // Cell-averaged value through the enhancement property int_K v = int_K P_H v.
  el.P0_val.assign(n_dofs, 0.0);
  for (int j = 0; j < 6; ++j)
    for (int i = 0; i < n_dofs; ++i) el.P0_val[i] += el.moments[j] * el.P_H(j, i) / g.area;

  // Linear gradient projection, component by component:
  //   (grad v, q e_c)_K = boundary term - (P_val v, dq/dx_c)_K.
  el.P1_grad = Matrix(6, n_dofs);
  {
    Matrix gram(3, 3);
    // Products of degree-1 monomials live in the degree-2 moment table.
    const int prod_idx[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) gram(i, j) = el.moments[prod_idx[i][j]];
    linalg::DenseLU gram_lu(gram);
    for (int c = 0; c < 2; ++c) {
      Matrix rhs(3, n_dofs);
      for (int qi = 0; qi < 3; ++qi) {
        std::vector<double> row(n_dofs, 0.0);
        for (int e = 0; e < nv; ++e) {
          double nc = c == 0 ? g.edge_normal[e].x : g.edge_normal[e].y;
          auto q = [&](const Vec2& p) { return mb.eval(p)[qi]; };
          accumulate_edge_value_row(g, family, e, q, row, nc);
        }
        // dq/dx_c is 1/scale for the matching linear monomial, zero otherwise.
        if ((c == 0 && qi == 1) || (c == 1 && qi == 2))
          for (int i = 0; i < n_dofs; ++i) row[i] -= g.area * el.P0_val[i] / g.diameter;
        for (int i = 0; i < n_dofs; ++i) rhs(qi, i) = row[i];
      }
      Matrix coeff = gram_lu.solve(rhs);
      for (int qi = 0; qi < 3; ++qi)
        for (int i = 0; i < n_dofs; ++i) el.P1_grad(3 * c + qi, i) = coeff(qi, i);
    }
  }

  // Stabilization on the projection complement.
  {
    Matrix DP = el.D * el.P_H;
    Matrix I_DP = Matrix::identity(n_dofs) - DP;
    el.S = I_DP.transpose() * I_DP;
    el.S = el.S.scaled(el.s_k);
  }

  el.lop.assign(n_dofs, 0.0);
  for (int i = 0; i < n_dofs; ++i)
    el.lop[i] = el.P0_hess(0, i) + el.P0_hess(2, i) - lambda * el.P0_val[i];

  return el;
}

std::vector<double> dofs_of_polynomial(const ElementGeometry& g, Family family,
                                       const std::vector<double>& coeffs) {
  if (coeffs.size() != 6) throw std::invalid_argument("dofs_of_polynomial: need 6 coefficients");
  const MonomialBasis mb(g.centroid, g.diameter, 2);
  auto poly = [&](const Vec2& p) {
    auto v = mb.eval(p);
    double s = 0.0;
    for (int j = 0; j < 6; ++j) s += coeffs[j] * v[j];
    return s;
  };
  auto grad = [&](const Vec2& p) {
    auto gr = mb.eval_gradient(p);
    Vec2 s{0.0, 0.0};
    for (int j = 0; j < 6; ++j) s += gr[j] * coeffs[j];
    return s;
  };
  return interpolate(g, family, poly, grad, 4);
}

std::vector<double> interpolate(const ElementGeometry& g, Family family,
                                const std::function<double(const Vec2&)>& f,
                                const std::function<Vec2(const Vec2&)>& grad_f, int quad_order) {
  const int nv = g.num_vertices();
  std::vector<double> dofs(3 * nv, 0.0);
  if (family == Family::conforming) {
    for (int v = 0; v < nv; ++v) {
      dofs[3 * v] = f(g.verts[v]);
      Vec2 gr = grad_f(g.verts[v]);
      dofs[3 * v + 1] = g.h_vertex[v] * gr.x;
      dofs[3 * v + 2] = g.h_vertex[v] * gr.y;
    }
  } else {
    for (int v = 0; v < nv; ++v) dofs[v] = f(g.verts[v]);
    for (int e = 0; e < nv; ++e) {
      auto rule = basis::edge_quadrature(g.verts[e], g.verts[(e + 1) % nv], quad_order);
      double mean = 0.0, nmom = 0.0;
      for (std::size_t k = 0; k < rule.points.size(); ++k) {
        mean += rule.weights[k] * f(rule.points[k]);
        nmom += rule.weights[k] * grad_f(rule.points[k]).dot(g.edge_normal[e]);
      }
      dofs[nv + e] = mean / g.edge_length[e];
      dofs[2 * nv + e] = nmom;
    }
  }
  return dofs;
}

}  // namespace hjbvem::element
