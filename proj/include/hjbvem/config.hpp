#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "hjbvem/analysis.hpp"

namespace hjbvem::config {

// Flat bag of run settings. Fields map one-to-one onto CLI flags and config
// file keys; validate() pins every cross-field rule before any work starts.
struct RunConfig {
  std::string problem = "example1";
  std::string family = "conforming";
  std::string mesh = "triangle";
  std::string mesh_file;  // imported instead of generated when set
  std::vector<int> levels = {8, 16, 32};
  int n = 8;  // subdivisions for single solves and make-mesh
  double lambda = std::numeric_limits<double>::quiet_NaN();  // NaN keeps the problem default
  int n_theta = 16;
  int n_phi = 16;
  int fine_n = 64;
  double tol = 1e-8;
  int itermax = 30;
  double theta = 0.5;
  std::string metric = "hessian";  // or "bnorm"
  int quad_order = 8;
  int error_quad_order = 10;
  std::string output;
  std::uint64_t seed = 0;
  int threads = 1;
  bool timing = false;
  int cordes_grid = 64;
  // Constant-coefficient linear problem, selected with problem = custom.
  std::vector<double> coef_a = {1.0, 0.0, 1.0};  // xx, xy, yy
  std::vector<double> coef_b = {0.0, 0.0};
  double coef_c = 0.0;
  double coef_f = 1.0;
  double declared_eps = 0.0;
  std::vector<double> domain = {0.0, 0.0, 1.0, 1.0};  // xmin ymin xmax ymax

  // Throws std::invalid_argument naming the offending key.
  void validate() const;
};

element::Family family(const RunConfig& cfg);

// Builtin by name with the configured control grids, or the custom
// constant-coefficient problem; applies the lambda override.
problem::HJBProblem make_problem(const RunConfig& cfg);

// Imported from mesh_file when set, otherwise structured over `rect` at n
// subdivisions.
mesh::PolygonalMesh make_run_mesh(const RunConfig& cfg, const Rect& rect);

newton::NewtonConfig newton_config(const RunConfig& cfg);
analysis::StudyConfig study_config(const RunConfig& cfg);

// Small-denominator fraction matching v to 1e-10, e.g. "1/7"; empty when
// nothing below denominator 100 fits or v is an integer.
std::string fraction_hint(double v);

// Human-readable audit, one "key: value" line each, fractions annotated.
std::string format_report(const problem::CordesReport& report, const std::string& problem_name);

}  // namespace hjbvem::config
