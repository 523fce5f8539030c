#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hjbvem::linalg {

struct SingularMatrixError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense row-major matrix. Sized for element-local work (a few dozen rows).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  const std::vector<double>& data() const { return data_; }

  Matrix operator*(const Matrix& o) const;
  Matrix operator+(const Matrix& o) const;
  Matrix operator-(const Matrix& o) const;
  Matrix scaled(double s) const;
  Matrix transpose() const;
  std::vector<double> apply(const std::vector<double>& x) const;
  // Largest absolute entry.
  double max_abs() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// LU factorization with partial pivoting. Throws SingularMatrixError when a
// pivot falls below 1e-14 times the largest entry of the input matrix.
class DenseLU {
 public:
  explicit DenseLU(Matrix a);
  std::vector<double> solve(std::vector<double> b) const;
  Matrix solve(const Matrix& b) const;

 private:
  Matrix lu_;
  std::vector<std::size_t> perm_;
};

std::vector<double> dense_solve(const Matrix& a, const std::vector<double>& b);
// Solves A X = B column by column.
Matrix dense_solve(const Matrix& a, const Matrix& b);

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
std::vector<double> symmetric_eigenvalues(const Matrix& a);

struct Triplet {
  int row;
  int col;
  double value;
};

// Compressed sparse row matrix. Duplicate triplets are summed on build in a
// deterministic order.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  static SparseMatrix from_triplets(int rows, int cols, const std::vector<Triplet>& triplets);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t nonzeros() const { return values_.size(); }

  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }

  std::vector<double> apply(const std::vector<double>& x) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> row_ptr_;
  std::vector<int> col_idx_;
  std::vector<double> values_;
};

// Sparse direct solve (LU with fill-reducing column ordering). Verifies the
// relative residual against 1e-10 and throws SingularMatrixError on rank
// deficiency or residual failure.
std::vector<double> sparse_solve(const SparseMatrix& a, const std::vector<double>& b);

}  // namespace hjbvem::linalg
