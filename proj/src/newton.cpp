#include "hjbvem/newton.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "hjbvem/linalg.hpp"

namespace hjbvem::newton {

namespace {

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double relative_residual(const linalg::SparseMatrix& a, const std::vector<double>& x,
                         const std::vector<double>& b) {
  auto ax = a.apply(x);
  double num = 0.0;
  for (std::size_t i = 0; i < ax.size(); ++i) {
    const double r = ax[i] - b[i];
    num += r * r;
  }
  const double den = norm2(b);
  return std::sqrt(num) / (den > 0.0 ? den : 1.0);
}

}  // namespace

NewtonResult solve_hjb(const assembly::Discretization& disc, const problem::HJBProblem& p,
                       const NewtonConfig& config) {
  if (!(config.tol > 0.0 && config.tol < 1.0))
    throw std::invalid_argument("solve_hjb: tol must lie in (0, 1)");
  if (config.itermax < 0) throw std::invalid_argument("solve_hjb: itermax must be >= 0");
  if (!config.initial_free.empty() &&
      static_cast<int>(config.initial_free.size()) != disc.dofs.num_free())
    throw std::invalid_argument("solve_hjb: initial guess size mismatch");

  NewtonResult out;
  out.free_solution = config.initial_free.empty()
                          ? std::vector<double>(disc.dofs.num_free(), 0.0)
                          : config.initial_free;
  out.raw_solution = disc.dofs.expand(out.free_solution);

  assembly::FrozenControlField prev_field;
  bool have_prev_field = false;

  for (int j = 1; j <= config.itermax; ++j) {
    auto field = assembly::select_argmax_controls(disc, p, out.raw_solution);
    NewtonIteration it;
    it.iteration = j;
    it.changed_controls = have_prev_field ? field.count_changes(prev_field) : 0;

    auto sys = assembly::assemble_linearized(disc, p, field, config.theta);
    auto next = linalg::sparse_solve(sys.A, sys.rhs);
    it.linear_residual = relative_residual(sys.A, next, sys.rhs);

    auto next_raw = disc.dofs.expand(next);
    if (config.metric == ErrorMetric::projected_hessian) {
      it.err = assembly::hessian_increment_norm(disc, next_raw, out.raw_solution);
    } else {
      std::vector<double> diff(next_raw.size());
      for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = next_raw[i] - out.raw_solution[i];
      it.err = std::sqrt(assembly::b_norm_squared(disc, diff));
    }

    out.free_solution = std::move(next);
    out.raw_solution = std::move(next_raw);
    prev_field = std::move(field);
    have_prev_field = true;
    out.trace.push_back(it);
    out.iterations = j;
    if (it.err <= config.tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace hjbvem::newton
