#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "hjbvem/element.hpp"
#include "hjbvem/linalg.hpp"
#include "hjbvem/mesh.hpp"
#include "hjbvem/problem.hpp"

namespace hjbvem::assembly {

// Global numbering with homogeneous Dirichlet elimination. Raw DOFs follow
// the mesh entities (conforming: value and scaled gradient per vertex;
// nonconforming: vertex values, then per edge a value moment and a normal
// moment in the edge's stored orientation). Free DOFs are what remains after
// fixing boundary values: vertex values and boundary edge value moments are
// pinned to zero, and conforming vertex gradients on straight boundary
// stretches are rotated into (tangential, normal) pairs with the tangential
// part pinned; at corners both components are pinned.
class DofMap {
 public:
  DofMap(const mesh::PolygonalMesh& mesh, element::Family family);

  element::Family family() const { return family_; }
  int num_raw() const { return num_raw_; }
  int num_free() const { return num_free_; }

  const std::vector<int>& cell_raw(int c) const { return cell_raw_[c]; }
  const std::vector<double>& cell_sign(int c) const { return cell_sign_[c]; }

  // Columns of the constraint map T: raw = T * free, with fixed DOFs at zero.
  const std::vector<std::pair<int, double>>& raw_terms(int raw) const { return raw_to_free_[raw]; }

  std::vector<double> expand(const std::vector<double>& free_vec) const;
  // T^T raw; exact inverse of expand on vectors satisfying the constraints.
  std::vector<double> project(const std::vector<double>& raw_vec) const;

 private:
  element::Family family_;
  int num_raw_ = 0;
  int num_free_ = 0;
  std::vector<std::vector<int>> cell_raw_;
  std::vector<std::vector<double>> cell_sign_;
  std::vector<std::vector<std::pair<int, double>>> raw_to_free_;
};

// Everything reusable across Newton iterations on one mesh.
struct Discretization {
  const mesh::PolygonalMesh* mesh = nullptr;
  element::Family family = element::Family::conforming;
  double lambda = 0.0;
  std::vector<element::ElementGeometry> geoms;
  std::vector<element::LocalElement> elements;
  std::vector<basis::QuadratureRule> quads;
  DofMap dofs;

  Discretization(const mesh::PolygonalMesh& m, element::Family fam, double lambda_,
                 int quad_order = 8);

  std::vector<double> gather_local(int c, const std::vector<double>& raw) const;
};

// Selected control and frozen coefficient data per cell quadrature point.
struct FrozenPoint {
  int control = 0;
  double gamma = 0.0;
  SymMat2 A;
  Vec2 b;
  double c = 0.0;
  double f = 0.0;
};

struct FrozenControlField {
  std::vector<std::vector<FrozenPoint>> cells;

  int count_changes(const FrozenControlField& other) const;
};

// Argmax of gamma^a (A^a : P0 D^2 u + b^a . P0 grad u - c^a P0 u - f^a) per
// quadrature point; ties resolve to the lowest control index. The weight
// keeps the frozen linearization consistent with the sup in the residual.
FrozenControlField select_argmax_controls(const Discretization& disc, const problem::HJBProblem& p,
                                          const std::vector<double>& raw_state);

struct LinearSystem {
  linalg::SparseMatrix A;
  std::vector<double> rhs;
};

// Linearized stabilized bilinear form with the frozen control field:
//   (gamma^a Lhat^a u - Lhat_lambda u, Lhat_lambda v) + theta B_* +
//   (1-theta) (Lhat_lambda u, Lhat_lambda v) + stabilization,
// against the right side (gamma^a f^a, Lhat_lambda v), on free DOFs.
LinearSystem assemble_linearized(const Discretization& disc, const problem::HJBProblem& p,
                                 const FrozenControlField& frozen, double theta = 0.5);

// Residual of the nonlinear form: r[i] = a_h(u; T e_i) with the pointwise
// sup of gamma^a (Lhat^a u - f^a) over the sampled control set.
std::vector<double> assemble_residual(const Discretization& disc, const problem::HJBProblem& p,
                                      const std::vector<double>& raw_state, double theta = 0.5);

// Discrete norm squared: sum_K |P0 D2 v|^2 + 2 lambda |P0 grad v|^2 +
// lambda^2 |P0 v|^2 over the cell plus the stabilization term.
double b_norm_squared(const Discretization& disc, const std::vector<double>& raw_state);

// Cellwise L2 norm of the projected Hessian difference between two states,
// the stopping quantity of the outer iteration.
double hessian_increment_norm(const Discretization& disc, const std::vector<double>& raw_a,
                              const std::vector<double>& raw_b);

// Raw DOF vector interpolating a smooth function.
std::vector<double> interpolate_raw(const Discretization& disc,
                                    const std::function<double(const Vec2&)>& f,
                                    const std::function<Vec2(const Vec2&)>& grad_f);

}  // namespace hjbvem::assembly
