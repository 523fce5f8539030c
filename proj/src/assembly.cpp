#include "hjbvem/assembly.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hjbvem::assembly {

using element::Family;
using linalg::Matrix;

DofMap::DofMap(const mesh::PolygonalMesh& mesh, Family family) : family_(family) {
  const int nv = mesh.num_vertices();
  const int ne = mesh.num_edges();
  num_raw_ = family == Family::conforming ? 3 * nv : nv + 2 * ne;
  raw_to_free_.resize(num_raw_);
  num_free_ = 0;

  if (family == Family::conforming) {
    for (int v = 0; v < nv; ++v) {
      if (!mesh.vertex_on_boundary(v)) {
        raw_to_free_[3 * v].push_back({num_free_++, 1.0});
        raw_to_free_[3 * v + 1].push_back({num_free_++, 1.0});
        raw_to_free_[3 * v + 2].push_back({num_free_++, 1.0});
        continue;
      }
      // Value pinned. The gradient stays free only in the boundary-normal
      // direction, and only where the two adjacent boundary edges are
      // collinear; corners pin the whole gradient.
      const auto& bes = mesh.boundary_edges_of_vertex(v);
      const auto& e0 = mesh.edge(bes[0]);
      const auto& e1 = mesh.edge(bes[1]);
      const Vec2 d0 = (mesh.vertex(e0.b) - mesh.vertex(e0.a)).normalized();
      const Vec2 d1 = (mesh.vertex(e1.b) - mesh.vertex(e1.a)).normalized();
      if (std::abs(d0.cross(d1)) <= 1e-9) {
        const Vec2 n = e0.normal;
        const int q = num_free_++;
        raw_to_free_[3 * v + 1].push_back({q, n.x});
        raw_to_free_[3 * v + 2].push_back({q, n.y});
      }
    }
  } else {
    for (int v = 0; v < nv; ++v)
      if (!mesh.vertex_on_boundary(v)) raw_to_free_[v].push_back({num_free_++, 1.0});
    for (int e = 0; e < ne; ++e) {
      if (!mesh.edge(e).boundary()) raw_to_free_[nv + 2 * e].push_back({num_free_++, 1.0});
      raw_to_free_[nv + 2 * e + 1].push_back({num_free_++, 1.0});
    }
  }

  cell_raw_.resize(mesh.num_cells());
  cell_sign_.resize(mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& cell = mesh.cell(c);
    const int n = static_cast<int>(cell.vertices.size());
    auto& raw = cell_raw_[c];
    auto& sign = cell_sign_[c];
    if (family == Family::conforming) {
      for (int i = 0; i < n; ++i) {
        raw.push_back(3 * cell.vertices[i]);
        raw.push_back(3 * cell.vertices[i] + 1);
        raw.push_back(3 * cell.vertices[i] + 2);
      }
      sign.assign(3 * n, 1.0);
    } else {
      for (int i = 0; i < n; ++i) raw.push_back(cell.vertices[i]);
      for (int i = 0; i < n; ++i) raw.push_back(nv + 2 * cell.edge_ids[i]);
      for (int i = 0; i < n; ++i) raw.push_back(nv + 2 * cell.edge_ids[i] + 1);
      sign.assign(2 * n, 1.0);
      // The shared normal moment is stored with the edge's own normal; a cell
      // on the other side sees the opposite sign.
      for (int i = 0; i < n; ++i) sign.push_back(static_cast<double>(cell.edge_signs[i]));
    }
  }
}

std::vector<double> DofMap::expand(const std::vector<double>& free_vec) const {
  if (static_cast<int>(free_vec.size()) != num_free_)
    throw std::invalid_argument("DofMap::expand: size mismatch");
  std::vector<double> raw(num_raw_, 0.0);
  for (int r = 0; r < num_raw_; ++r)
    for (const auto& [f, w] : raw_to_free_[r]) raw[r] += w * free_vec[f];
  return raw;
}

std::vector<double> DofMap::project(const std::vector<double>& raw_vec) const {
  if (static_cast<int>(raw_vec.size()) != num_raw_)
    throw std::invalid_argument("DofMap::project: size mismatch");
  std::vector<double> free_vec(num_free_, 0.0);
  for (int r = 0; r < num_raw_; ++r)
    for (const auto& [f, w] : raw_to_free_[r]) free_vec[f] += w * raw_vec[r];
  return free_vec;
}

Discretization::Discretization(const mesh::PolygonalMesh& m, Family fam, double lambda_,
                               int quad_order)
    : mesh(&m), family(fam), lambda(lambda_), dofs(m, fam) {
  geoms.reserve(m.num_cells());
  elements.reserve(m.num_cells());
  quads.reserve(m.num_cells());
  for (int c = 0; c < m.num_cells(); ++c) {
    geoms.push_back(element::ElementGeometry::from_mesh(m, c));
    elements.push_back(element::build_element(geoms.back(), fam, lambda));
    quads.push_back(basis::cell_quadrature(geoms.back().verts, quad_order));
  }
}

std::vector<double> Discretization::gather_local(int c, const std::vector<double>& raw) const {
  const auto& idx = dofs.cell_raw(c);
  const auto& sgn = dofs.cell_sign(c);
  std::vector<double> loc(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) loc[i] = sgn[i] * raw[idx[i]];
  return loc;
}

int FrozenControlField::count_changes(const FrozenControlField& other) const {
  int changes = 0;
  for (std::size_t c = 0; c < cells.size(); ++c)
    for (std::size_t q = 0; q < cells[c].size(); ++q)
      if (cells[c][q].control != other.cells[c][q].control) ++changes;
  return changes;
}

namespace {

struct ProjectedState {
  SymMat2 H;
  Vec2 G;
  double V = 0.0;
  double L = 0.0;  // lop . u
};

ProjectedState project_state(const element::LocalElement& el, const std::vector<double>& loc) {
  ProjectedState s;
  for (int i = 0; i < el.n_dofs; ++i) {
    s.H.xx += el.P0_hess(0, i) * loc[i];
    s.H.xy += el.P0_hess(1, i) * loc[i];
    s.H.yy += el.P0_hess(2, i) * loc[i];
    s.G.x += el.P0_grad(0, i) * loc[i];
    s.G.y += el.P0_grad(1, i) * loc[i];
    s.V += el.P0_val[i] * loc[i];
    s.L += el.lop[i] * loc[i];
  }
  return s;
}

}  // namespace

FrozenControlField select_argmax_controls(const Discretization& disc, const problem::HJBProblem& p,
                                          const std::vector<double>& raw_state) {
  FrozenControlField field;
  field.cells.resize(disc.elements.size());
  for (std::size_t c = 0; c < disc.elements.size(); ++c) {
    const auto& el = disc.elements[c];
    const auto& rule = disc.quads[c];
    const auto loc = disc.gather_local(static_cast<int>(c), raw_state);
    const ProjectedState s = project_state(el, loc);
    auto& pts = field.cells[c];
    pts.resize(rule.points.size());
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Vec2& x = rule.points[q];
      double best = -std::numeric_limits<double>::infinity();
      FrozenPoint fp;
      for (const auto& alpha : p.controls.controls) {
        const SymMat2 A = p.A(x, alpha);
        const Vec2 b = p.b(x, alpha);
        const double cv = p.c(x, alpha);
        const double fv = p.f(x, alpha);
        const double g = problem::gamma(p, x, alpha);
        // The weighted objective realizes the sup inside the residual, so a
        // fixed point of the outer iteration solves the nonlinear equation.
        const double obj = g * (A.frob(s.H) + b.dot(s.G) - cv * s.V - fv);
        if (obj > best) {
          best = obj;
          fp.control = alpha.index;
          fp.gamma = g;
          fp.A = A;
          fp.b = b;
          fp.c = cv;
          fp.f = fv;
        }
      }
      pts[q] = fp;
    }
  }
  return field;
}

namespace {

// Scatter a local matrix and load vector into triplet/vector storage through
// the constraint map, applying the per-cell orientation signs.
void scatter(const DofMap& dofs, int c, const Matrix& m_loc, const std::vector<double>& r_loc,
             std::vector<linalg::Triplet>& trips, std::vector<double>& rhs) {
  const auto& idx = dofs.cell_raw(c);
  const auto& sgn = dofs.cell_sign(c);
  const int n = static_cast<int>(idx.size());
  for (int i = 0; i < n; ++i) {
    const auto& rows = dofs.raw_terms(idx[i]);
    if (rows.empty()) continue;
    for (const auto& [fi, wi] : rows) {
      rhs[fi] += wi * sgn[i] * r_loc[i];
      for (int j = 0; j < n; ++j) {
        const double entry = sgn[i] * sgn[j] * m_loc(i, j);
        if (entry == 0.0) continue;
        for (const auto& [fj, wj] : dofs.raw_terms(idx[j]))
          trips.push_back({fi, fj, wi * wj * entry});
      }
    }
  }
}

}  // namespace

LinearSystem assemble_linearized(const Discretization& disc, const problem::HJBProblem&,
                                 const FrozenControlField& frozen, double theta) {
  const DofMap& dofs = disc.dofs;
  std::vector<linalg::Triplet> trips;
  std::vector<double> rhs(dofs.num_free(), 0.0);
  const double lambda = disc.lambda;

  for (std::size_t c = 0; c < disc.elements.size(); ++c) {
    const auto& el = disc.elements[c];
    const auto& rule = disc.quads[c];
    const auto& pts = frozen.cells[c];
    const int n = el.n_dofs;
    const double area = el.area;

    // gamma-weighted coefficient integrals over the cell.
    SymMat2 SA;
    Vec2 Sb;
    double Sc = 0.0, Sgf = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double wg = rule.weights[q] * pts[q].gamma;
      SA = SA + pts[q].A * wg;
      Sb += pts[q].b * wg;
      Sc += wg * pts[q].c;
      Sgf += wg * pts[q].f;
    }

    // Row functional of gamma Lhat^a - Lhat_lambda applied to the trial side.
    std::vector<double> r(n);
    for (int j = 0; j < n; ++j) {
      const SymMat2 Hj{el.P0_hess(0, j), el.P0_hess(1, j), el.P0_hess(2, j)};
      r[j] = SA.frob(Hj) + Sb.x * el.P0_grad(0, j) + Sb.y * el.P0_grad(1, j) - Sc * el.P0_val[j] -
             area * el.lop[j];
    }

    Matrix m_loc(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double bstar = el.P0_hess(0, i) * el.P0_hess(0, j) + 2.0 * el.P0_hess(1, i) * el.P0_hess(1, j) +
                       el.P0_hess(2, i) * el.P0_hess(2, j) +
                       2.0 * lambda *
                           (el.P0_grad(0, i) * el.P0_grad(0, j) + el.P0_grad(1, i) * el.P0_grad(1, j)) +
                       lambda * lambda * el.P0_val[i] * el.P0_val[j];
        m_loc(i, j) = el.lop[i] * r[j] + theta * area * bstar +
                      (1.0 - theta) * area * el.lop[i] * el.lop[j] + el.S(i, j);
      }
    }
    std::vector<double> r_loc(n);
    for (int i = 0; i < n; ++i) r_loc[i] = Sgf * el.lop[i];

    scatter(dofs, static_cast<int>(c), m_loc, r_loc, trips, rhs);
  }

  LinearSystem sys{linalg::SparseMatrix::from_triplets(dofs.num_free(), dofs.num_free(), trips),
                   std::move(rhs)};
  return sys;
}

std::vector<double> assemble_residual(const Discretization& disc, const problem::HJBProblem& p,
                                      const std::vector<double>& raw_state, double theta) {
  const DofMap& dofs = disc.dofs;
  std::vector<double> res(dofs.num_free(), 0.0);
  const double lambda = disc.lambda;

  for (std::size_t c = 0; c < disc.elements.size(); ++c) {
    const auto& el = disc.elements[c];
    const auto& rule = disc.quads[c];
    const int n = el.n_dofs;
    const double area = el.area;
    const auto loc = disc.gather_local(static_cast<int>(c), raw_state);
    const ProjectedState s = project_state(el, loc);

    // Pointwise renormalized sup, integrated over the cell.
    double fsum = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Vec2& x = rule.points[q];
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& alpha : p.controls.controls) {
        const double val = problem::gamma(p, x, alpha) *
                           (p.A(x, alpha).frob(s.H) + p.b(x, alpha).dot(s.G) -
                            p.c(x, alpha) * s.V - p.f(x, alpha));
        best = std::max(best, val);
      }
      fsum += rule.weights[q] * best;
    }

    std::vector<double> r_loc(n, 0.0);
    for (int i = 0; i < n; ++i) {
      const SymMat2 Hi{el.P0_hess(0, i), el.P0_hess(1, i), el.P0_hess(2, i)};
      const double bstar_u = Hi.frob(s.H) + 2.0 * lambda * (el.P0_grad(0, i) * s.G.x +
                                                            el.P0_grad(1, i) * s.G.y) +
                             lambda * lambda * el.P0_val[i] * s.V;
      double su = 0.0;
      for (int j = 0; j < n; ++j) su += el.S(i, j) * loc[j];
      r_loc[i] = el.lop[i] * (fsum - area * s.L) + theta * area * bstar_u +
                 (1.0 - theta) * area * s.L * el.lop[i] + su;
    }

    const auto& idx = dofs.cell_raw(c);
    const auto& sgn = dofs.cell_sign(c);
    for (int i = 0; i < n; ++i)
      for (const auto& [fi, wi] : dofs.raw_terms(idx[i])) res[fi] += wi * sgn[i] * r_loc[i];
  }
  return res;
}

double b_norm_squared(const Discretization& disc, const std::vector<double>& raw_state) {
  double total = 0.0;
  const double lambda = disc.lambda;
  for (std::size_t c = 0; c < disc.elements.size(); ++c) {
    const auto& el = disc.elements[c];
    const auto loc = disc.gather_local(static_cast<int>(c), raw_state);
    const ProjectedState s = project_state(el, loc);
    double sterm = 0.0;
    for (int i = 0; i < el.n_dofs; ++i) {
      double si = 0.0;
      for (int j = 0; j < el.n_dofs; ++j) si += el.S(i, j) * loc[j];
      sterm += loc[i] * si;
    }
    total += el.area * (s.H.frob_norm2() + 2.0 * lambda * s.G.norm2() + lambda * lambda * s.V * s.V) +
             sterm;
  }
  return total;
}

double hessian_increment_norm(const Discretization& disc, const std::vector<double>& raw_a,
                              const std::vector<double>& raw_b) {
  double total = 0.0;
  for (std::size_t c = 0; c < disc.elements.size(); ++c) {
    const auto& el = disc.elements[c];
    const auto la = disc.gather_local(static_cast<int>(c), raw_a);
    const auto lb = disc.gather_local(static_cast<int>(c), raw_b);
    SymMat2 d;
    for (int i = 0; i < el.n_dofs; ++i) {
      const double diff = la[i] - lb[i];
      d.xx += el.P0_hess(0, i) * diff;
      d.xy += el.P0_hess(1, i) * diff;
      d.yy += el.P0_hess(2, i) * diff;
    }
    total += el.area * d.frob_norm2();
  }
  return std::sqrt(total);
}

std::vector<double> interpolate_raw(const Discretization& disc,
                                    const std::function<double(const Vec2&)>& f,
                                    const std::function<Vec2(const Vec2&)>& grad_f) {
  const mesh::PolygonalMesh& m = *disc.mesh;
  std::vector<double> raw(disc.dofs.num_raw(), 0.0);
  if (disc.family == Family::conforming) {
    for (int v = 0; v < m.num_vertices(); ++v) {
      raw[3 * v] = f(m.vertex(v));
      const Vec2 g = grad_f(m.vertex(v));
      raw[3 * v + 1] = m.vertex_length_scale(v) * g.x;
      raw[3 * v + 2] = m.vertex_length_scale(v) * g.y;
    }
  } else {
    for (int v = 0; v < m.num_vertices(); ++v) raw[v] = f(m.vertex(v));
    for (int e = 0; e < m.num_edges(); ++e) {
      const auto& ed = m.edge(e);
      auto rule = basis::edge_quadrature(m.vertex(ed.a), m.vertex(ed.b), 8);
      double mean = 0.0, nmom = 0.0;
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        mean += rule.weights[q] * f(rule.points[q]);
        nmom += rule.weights[q] * grad_f(rule.points[q]).dot(ed.normal);
      }
      raw[m.num_vertices() + 2 * e] = mean / ed.length;
      raw[m.num_vertices() + 2 * e + 1] = nmom;
    }
  }
  return raw;
}

}  // namespace hjbvem::assembly
