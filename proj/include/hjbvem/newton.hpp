#pragma once

#include <vector>

#include "hjbvem/assembly.hpp"

namespace hjbvem::newton {

enum class ErrorMetric {
  projected_hessian,  // cellwise L2 norm of the projected Hessian increment
  b_norm,             // discrete B-norm of the increment
};

struct NewtonConfig {
  double tol = 1e-8;  // stopping tolerance, must lie in (0, 1)
  int itermax = 30;
  double theta = 0.5;
  ErrorMetric metric = ErrorMetric::projected_hessian;
  // Free-DOF starting point; empty means zero.
  std::vector<double> initial_free;
};

struct NewtonIteration {
  int iteration = 0;  // 1-based solve count
  double err = 0.0;   // increment norm against the previous iterate
  int changed_controls = 0;  // quadrature points whose argmax moved
  double linear_residual = 0.0;  // relative residual of the inner solve
};

struct NewtonResult {
  std::vector<double> free_solution;
  std::vector<double> raw_solution;
  bool converged = false;
  int iterations = 0;
  std::vector<NewtonIteration> trace;
};

// Outer semismooth iteration: freeze the argmax controls at the current
// iterate, solve the linearized system, and stop once the increment norm
// falls below tol. On non-convergence the last iterate is returned with
// converged = false.
NewtonResult solve_hjb(const assembly::Discretization& disc, const problem::HJBProblem& p,
                       const NewtonConfig& config = {});

}  // namespace hjbvem::newton
