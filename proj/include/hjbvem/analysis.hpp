#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hjbvem/assembly.hpp"
#include "hjbvem/newton.hpp"

namespace hjbvem::analysis {

struct ErrorNorms {
  double e0 = 0.0;  // L2 distance of the projected value to the exact solution
  double e1 = 0.0;  // L2 distance of the projected gradient
  double e2 = 0.0;  // L2 distance of the projected Hessian (Frobenius)
};

// Cellwise projection errors against the exact solution, integrated with a
// fresh quadrature of the given order. Requires the exact value, gradient and
// Hessian callbacks; throws std::invalid_argument when any is missing.
ErrorNorms error_norms(const assembly::Discretization& disc, const problem::HJBProblem& p,
                       const std::vector<double>& raw_solution, int quad_order = 10);

// Estimated orders of convergence: one entry per consecutive pair,
// rate_i = log(e_i / e_{i+1}) / log(h_i / h_{i+1}). Errors must be positive
// and the mesh sizes strictly decreasing.
std::vector<double> eoc(const std::vector<double>& errors, const std::vector<double>& h);

struct ConvergenceRow {
  std::string family;
  std::string mesh;
  int inv_h = 0;
  int ndof = 0;
  double e2 = 0.0;
  double rate2 = 0.0;  // NaN on rows without a predecessor
  double e1 = 0.0;
  double rate1 = 0.0;
  double e0 = 0.0;
  double rate0 = 0.0;
  int newton_iters = 0;
  double seconds = 0.0;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
};

struct StudyConfig {
  newton::NewtonConfig newton;
  int quad_order = 8;         // assembly quadrature
  int error_quad_order = 10;  // norm quadrature
  bool timing = false;        // measure wall time; off keeps the report reproducible
  int threads = 1;            // refinement levels solved concurrently
  std::uint64_t seed = 0;     // forwarded to the mesh generator
};

// Solve the problem at every refinement level (cells per side = level) and
// tabulate errors with rates between consecutive levels. Levels are
// independent and may run on config.threads workers; the report is ordered by
// level regardless. Failures rethrow with the offending level in the message.
ConvergenceReport convergence_study(const problem::HJBProblem& p, element::Family family,
                                    mesh::MeshKind kind, const std::vector<int>& levels,
                                    const StudyConfig& config = {});

// Pinned schema: family,mesh,inv_h,ndof,E2,rate2,E1,rate1,E0,rate0,newton_iters,seconds.
// Rates are blank on rows without a predecessor; seconds prints as 0.000
// unless timing was enabled. Formatting is locale-independent so identical
// reports serialize to identical bytes.
std::string to_csv(const ConvergenceReport& report);
void write_csv(const ConvergenceReport& report, const std::string& path);

}  // namespace hjbvem::analysis
