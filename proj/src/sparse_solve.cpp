#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <cmath>

#include "hjbvem/linalg.hpp"

namespace hjbvem::linalg {

// Direct solver backend: SparseLU with COLAMD column ordering. The factorize /
// solve pipeline is deterministic for a fixed matrix, which the CSV
// reproducibility contract relies on.
std::vector<double> sparse_solve(const SparseMatrix& a, const std::vector<double>& b) {
  if (a.rows() != a.cols()) throw std::invalid_argument("sparse_solve: matrix must be square");
  if (static_cast<int>(b.size()) != a.rows()) throw std::invalid_argument("sparse_solve: rhs size mismatch");
  const int n = a.rows();
  if (n == 0) return {};

  Eigen::SparseMatrix<double> m(n, n);
  {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(a.nonzeros());
    for (int i = 0; i < n; ++i)
      for (int k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k)
        trips.emplace_back(i, a.col_idx()[k], a.values()[k]);
    m.setFromTriplets(trips.begin(), trips.end());
  }
  m.makeCompressed();

  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(m);
  lu.factorize(m);
  if (lu.info() != Eigen::Success)
    throw SingularMatrixError("sparse_solve: factorization failed: " + lu.lastErrorMessage());

  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) rhs[i] = b[i];
  Eigen::VectorXd x = lu.solve(rhs);

  double rnorm = (m * x - rhs).norm();
  double scale = rhs.norm();
  if (scale == 0.0) scale = 1.0;
  if (!(rnorm <= 1e-10 * scale))
    throw SingularMatrixError("sparse_solve: relative residual " + std::to_string(rnorm / scale) +
                              " exceeds 1e-10");

  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = x[i];
  return out;
}

}  // namespace hjbvem::linalg
