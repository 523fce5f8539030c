// Python module exposing the solver's main operations: built-in problems,
// structured meshes, single solves, refinement studies, and the coefficient
// audit. Heavy calls release the GIL.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hjbvem/analysis.hpp"
#include "hjbvem/config.hpp"
#include "hjbvem/newton.hpp"

namespace py = pybind11;
using namespace hjbvem;

namespace {

struct SolveOutput {
  bool converged = false;
  int iterations = 0;
  std::vector<double> dofs;
  bool has_errors = false;
  double e2 = std::nan(""), e1 = std::nan(""), e0 = std::nan("");
  std::vector<std::tuple<int, double, int>> trace;  // iteration, err, changed
};

SolveOutput run_solve(const problem::HJBProblem& p, const mesh::PolygonalMesh& m,
                      const std::string& family, double tol, int itermax, double theta,
                      int quad_order, int error_quad_order) {
  const auto fam = element::family_from_string(family);
  const assembly::Discretization disc(m, fam, p.lambda, quad_order);
  newton::NewtonConfig cfg;
  cfg.tol = tol;
  cfg.itermax = itermax;
  cfg.theta = theta;
  const auto res = newton::solve_hjb(disc, p, cfg);

  SolveOutput out;
  out.converged = res.converged;
  out.iterations = res.iterations;
  out.dofs = res.raw_solution;
  for (const auto& it : res.trace) out.trace.emplace_back(it.iteration, it.err, it.changed_controls);
  if (res.converged && p.has_exact()) {
    const auto norms = analysis::error_norms(disc, p, res.raw_solution, error_quad_order);
    out.has_errors = true;
    out.e2 = norms.e2;
    out.e1 = norms.e1;
    out.e0 = norms.e0;
  }
  return out;
}

analysis::ConvergenceReport run_study(const problem::HJBProblem& p, const std::string& family,
                                      const std::string& mesh_kind, const std::vector<int>& levels,
                                      double tol, int itermax, double theta, int quad_order,
                                      int error_quad_order, int threads, std::uint64_t seed,
                                      bool timing) {
  analysis::StudyConfig cfg;
  cfg.newton.tol = tol;
  cfg.newton.itermax = itermax;
  cfg.newton.theta = theta;
  cfg.quad_order = quad_order;
  cfg.error_quad_order = error_quad_order;
  cfg.threads = threads;
  cfg.seed = seed;
  cfg.timing = timing;
  return analysis::convergence_study(p, element::family_from_string(family),
                                     mesh::mesh_kind_from_string(mesh_kind), levels, cfg);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Virtual element solver for HJB and nondivergence-form elliptic problems";
  m.attr("__version__") = "0.1.0";

  py::class_<mesh::PolygonalMesh>(m, "Mesh")
      .def_property_readonly("num_vertices", &mesh::PolygonalMesh::num_vertices)
      .def_property_readonly("num_cells", &mesh::PolygonalMesh::num_cells)
      .def_property_readonly("num_edges", &mesh::PolygonalMesh::num_edges)
      .def("save", [](const mesh::PolygonalMesh& self, const std::string& path) {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open " + path);
        mesh::export_mesh(self, out);
      })
      .def("__repr__", [](const mesh::PolygonalMesh& self) {
        std::ostringstream ss;
        ss << "Mesh(" << self.num_cells() << " cells, " << self.num_vertices() << " vertices)";
        return ss.str();
      });

  m.def("generate_mesh",
        [](const std::string& kind, int n, std::array<double, 4> domain, std::uint64_t seed) {
          const Rect rect{domain[0], domain[1], domain[2], domain[3]};
          return mesh::generate_structured(mesh::mesh_kind_from_string(kind), n, rect, seed);
        },
        py::arg("kind"), py::arg("n"), py::arg("domain") = std::array<double, 4>{0, 0, 1, 1},
        py::arg("seed") = 0,
        "Structured mesh of the rectangle: triangle, square, hexagon, or distorted_quad");

  m.def("load_mesh", [](const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return mesh::import_mesh(in);
  });

  py::class_<problem::HJBProblem>(m, "Problem")
      .def_readonly("name", &problem::HJBProblem::name)
      .def_readonly("lam", &problem::HJBProblem::lambda)
      .def_readonly("declared_eps", &problem::HJBProblem::declared_eps)
      .def_readonly("notes", &problem::HJBProblem::notes)
      .def_property_readonly("num_controls",
                             [](const problem::HJBProblem& p) { return p.controls.size(); })
      .def_property_readonly("has_exact", &problem::HJBProblem::has_exact)
      .def("__repr__", [](const problem::HJBProblem& p) { return "Problem(" + p.name + ")"; });

  m.def("make_builtin",
        [](const std::string& name, int n_theta, int n_phi, int fine_n) {
          return problem::make_builtin(name, {n_theta, n_phi, fine_n});
        },
        py::arg("name"), py::arg("n_theta") = 16, py::arg("n_phi") = 16, py::arg("fine_n") = 64,
        "example1, example2, or example3; grid arguments apply to example2");

  py::class_<problem::CordesReport>(m, "CordesReport")
      .def_readonly("lower_order_branch", &problem::CordesReport::lower_order_branch)
      .def_readonly("sup_ratio", &problem::CordesReport::sup_ratio)
      .def_readonly("implied_eps", &problem::CordesReport::implied_eps)
      .def_readonly("declared_eps", &problem::CordesReport::declared_eps)
      .def_readonly("passed", &problem::CordesReport::pass)
      .def_readonly("rho1", &problem::CordesReport::rho1)
      .def_readonly("rho2", &problem::CordesReport::rho2)
      .def_readonly("min_c", &problem::CordesReport::min_c)
      .def_readonly("min_gamma", &problem::CordesReport::min_gamma)
      .def_readonly("max_gamma", &problem::CordesReport::max_gamma)
      .def_readonly("notes", &problem::CordesReport::notes);

  m.def("check_cordes", &problem::check_cordes, py::arg("problem"), py::arg("grid_n") = 64,
        py::call_guard<py::gil_scoped_release>());

  m.def("cordes_text",
        [](const problem::HJBProblem& p, int grid_n) {
          return config::format_report(problem::check_cordes(p, grid_n), p.name);
        },
        py::arg("problem"), py::arg("grid_n") = 64, "Audit report formatted as plain text");

  py::class_<SolveOutput>(m, "SolveResult")
      .def_readonly("converged", &SolveOutput::converged)
      .def_readonly("iterations", &SolveOutput::iterations)
      .def_readonly("dofs", &SolveOutput::dofs)
      .def_readonly("has_errors", &SolveOutput::has_errors)
      .def_readonly("e2", &SolveOutput::e2)
      .def_readonly("e1", &SolveOutput::e1)
      .def_readonly("e0", &SolveOutput::e0)
      .def_readonly("trace", &SolveOutput::trace);

  m.def("solve", &run_solve, py::arg("problem"), py::arg("mesh"),
        py::arg("family") = "conforming", py::arg("tol") = 1e-8, py::arg("itermax") = 30,
        py::arg("theta") = 0.5, py::arg("quad_order") = 8, py::arg("error_quad_order") = 10,
        py::call_guard<py::gil_scoped_release>(),
        "Semismooth Newton solve on the given mesh; errors are filled when the "
        "problem has an exact solution");

  py::class_<analysis::ConvergenceRow>(m, "StudyRow")
      .def_readonly("family", &analysis::ConvergenceRow::family)
      .def_readonly("mesh", &analysis::ConvergenceRow::mesh)
      .def_readonly("inv_h", &analysis::ConvergenceRow::inv_h)
      .def_readonly("ndof", &analysis::ConvergenceRow::ndof)
      .def_readonly("e2", &analysis::ConvergenceRow::e2)
      .def_readonly("rate2", &analysis::ConvergenceRow::rate2)
      .def_readonly("e1", &analysis::ConvergenceRow::e1)
      .def_readonly("rate1", &analysis::ConvergenceRow::rate1)
      .def_readonly("e0", &analysis::ConvergenceRow::e0)
      .def_readonly("rate0", &analysis::ConvergenceRow::rate0)
      .def_readonly("newton_iters", &analysis::ConvergenceRow::newton_iters)
      .def_readonly("seconds", &analysis::ConvergenceRow::seconds);

  py::class_<analysis::ConvergenceReport>(m, "StudyReport")
      .def_readonly("rows", &analysis::ConvergenceReport::rows)
      .def("csv", [](const analysis::ConvergenceReport& r) { return analysis::to_csv(r); });

  m.def("convergence_study", &run_study, py::arg("problem"), py::arg("family"),
        py::arg("mesh_kind"), py::arg("levels"), py::arg("tol") = 1e-8, py::arg("itermax") = 30,
        py::arg("theta") = 0.5, py::arg("quad_order") = 8, py::arg("error_quad_order") = 10,
        py::arg("threads") = 1, py::arg("seed") = 0, py::arg("timing") = false,
        py::call_guard<py::gil_scoped_release>(),
        "Refinement study over levels of cells per side; rates use h = 1/level");
}
