#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hjbvem/geometry.hpp"

namespace hjbvem::problem {

// One sampled control point. The index is the position in the enumerated
// set; argmax ties are resolved toward the lowest index.
struct Control {
  int index = 0;
  std::vector<double> params;
};

struct ControlSet {
  std::vector<Control> controls;
  std::string description;

  int size() const { return static_cast<int>(controls.size()); }
  const Control& operator[](int i) const { return controls[i]; }
};

// Tensor grid of control parameters. Inclusive axes place n points with both
// endpoints; half-open axes place n points with the upper endpoint omitted
// (periodic parameters). Axes are enumerated with the first axis slowest.
struct ControlGridSpec {
  struct Axis {
    double lo = 0.0;
    double hi = 0.0;
    int n = 1;
    bool half_open = false;
  };
  std::vector<Axis> axes;
  // When non-empty the grid axes are ignored and the listed parameter
  // records are enumerated in order.
  std::vector<std::vector<double>> explicit_points;
};

ControlSet sample_control_set(const ControlGridSpec& spec);

// A Dirichlet HJB problem sup_a (A^a : D^2 u + b^a . grad u - c^a u - f^a) = 0
// on a rectangle, with homogeneous boundary values after subtracting the
// exact solution's trace (all built-ins vanish on the boundary). Linear
// problems are the singleton-control case. Coefficient callbacks must be
// pure: they are evaluated concurrently during assembly.
struct HJBProblem {
  std::string name;
  Rect domain;
  double lambda = 0.0;
  double declared_eps = 0.0;
  bool has_lower_order = true;  // any b or c nonzero; selects the Cordes branch
  std::string notes;            // known source discrepancies, surfaced in reports

  ControlSet controls;

  std::function<SymMat2(const Vec2&, const Control&)> A;
  std::function<Vec2(const Vec2&, const Control&)> b;
  std::function<double(const Vec2&, const Control&)> c;
  std::function<double(const Vec2&, const Control&)> f;

  // Null when the exact solution is unknown.
  std::function<double(const Vec2&)> exact_u;
  std::function<Vec2(const Vec2&)> exact_grad;
  std::function<SymMat2(const Vec2&)> exact_hess;

  bool has_exact() const { return static_cast<bool>(exact_u); }
};

// Renormalization weight. With lower-order terms (lambda > 0):
//   gamma = (tr A + c/lambda) / (|A|^2 + |b|^2/(2 lambda) + (c/lambda)^2),
// otherwise gamma = tr A / |A|^2, with |.| the Frobenius norm.
double gamma(const HJBProblem& p, const Vec2& x, const Control& alpha);

struct CordesReport {
  bool lower_order_branch = true;
  double sup_ratio = 0.0;    // max over sample points and controls
  double implied_eps = 0.0;  // 1/ratio - 2 (branch 1) or 1/ratio - 1 (branch 2)
  double declared_eps = 0.0;
  bool pass = false;  // sup_ratio <= 1/(2+eps) resp. 1/(1+eps), 1e-12 slack
  double rho1 = 0.0;  // min eigenvalue of A over samples (ellipticity)
  double rho2 = 0.0;  // max eigenvalue of A over samples
  double min_c = 0.0;
  double min_gamma = 0.0;
  double max_gamma = 0.0;
  std::string notes;
};

// Samples the Cordes ratio on an inclusive (grid_n+1)^2 tensor grid over the
// closed domain plus the quadrature points of a small reference mesh.
CordesReport check_cordes(const HJBProblem& p, int grid_n = 64);

struct BuiltinOptions {
  int n_theta = 16;  // example2 control grid
  int n_phi = 16;
  int fine_n = 64;  // reference grid used to precompute example2's load term
};

// name is one of example1, example2, example3.
HJBProblem make_builtin(const std::string& name, const BuiltinOptions& opts = {});

}  // namespace hjbvem::problem
