#pragma once

// Dense symmetric linear algebra: Cholesky, cyclic Jacobi eigendecomposition
// and the symmetric-definite generalized eigenproblem A w = lambda B w.

#include <cstddef>
#include <span>
#include <vector>

namespace privproj {

/// Dense column-major real matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);
  /// Builds from row-major nested initializer data (handy in tests).
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[c * rows_ + r]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }

  std::span<double> col(std::size_t c) { return {data_.data() + c * rows_, rows_}; }
  std::span<const double> col(std::size_t c) const {
    return {data_.data() + c * rows_, rows_};
  }

  std::span<const double> data() const noexcept { return data_; }

  Matrix transpose() const;
  double max_abs() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
/// a^T * b without materializing the transpose.
Matrix transpose_times(const Matrix& a, const Matrix& b);

/// Symmetric matrix; every write lands in both (i,j) and (j,i).
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t dim);

  static SymMatrix identity(std::size_t dim);
  static SymMatrix diagonal(std::span<const double> diag);
  /// Symmetrizes (a + a^T) / 2. Requires a square input.
  static SymMatrix from_dense(const Matrix& a);

  std::size_t dim() const noexcept { return dim_; }

  double operator()(std::size_t i, std::size_t j) const { return data_[j * dim_ + i]; }
  void set(std::size_t i, std::size_t j, double v) {
    data_[j * dim_ + i] = v;
    data_[i * dim_ + j] = v;
  }
  void add(std::size_t i, std::size_t j, double v) {
    data_[j * dim_ + i] += v;
    if (i != j) data_[i * dim_ + j] += v;
  }

  /// Rank-one update: this += alpha * v v^T.
  void add_outer(std::span<const double> v, double alpha = 1.0);
  void add_identity(double alpha);

  double max_abs() const noexcept;
  double trace() const noexcept;
  Matrix to_dense() const;

  SymMatrix& operator+=(const SymMatrix& other);
  SymMatrix& operator*=(double s);
  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator*(double s, SymMatrix a) { return a *= s; }

  friend bool operator==(const SymMatrix&, const SymMatrix&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

/// Lower-triangular Cholesky factor L with L L^T = B.
class LowerTriangular {
 public:
  explicit LowerTriangular(Matrix l) : l_(std::move(l)) {}

  std::size_t dim() const noexcept { return l_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return l_(i, j); }
  const Matrix& matrix() const noexcept { return l_; }

  /// Solves L y = rhs in place, column by column.
  void solve_lower(Matrix& rhs) const;
  /// Solves L^T y = rhs in place, column by column.
  void solve_upper(Matrix& rhs) const;

 private:
  Matrix l_;
};

/// Eigenvalues sorted non-increasing, each paired with a column of `vectors`.
/// Columns are sign-normalized: the largest-magnitude entry (lowest index on
/// ties) is positive.
struct EigenPairs {
  std::vector<double> values;
  Matrix vectors;
};

/// Throws NotPositiveDefinite when a pivot is <= dim * 1e-14 * max|b|.
LowerTriangular cholesky(const SymMatrix& b);

/// Cyclic Jacobi. Converged once max off-diagonal <= 1e-14 * max|a|; throws
/// NoConvergence after 100 sweeps.
EigenPairs sym_eig(const SymMatrix& a);

/// The k largest pairs of a w = lambda b w, with W^T b W = I.
EigenPairs generalized_eig(const SymMatrix& a, const SymMatrix& b, std::size_t k);

/// Modified Gram-Schmidt on the columns of `a`. Throws RankDeficient when a
/// column norm after projection falls below `pivot_tol` times its original
/// norm (or is exactly zero).
Matrix orthonormalize_columns(const Matrix& a, double pivot_tol = 1e-10);

/// Flips each column so its largest-magnitude entry is positive.
void sign_normalize_columns(Matrix& m);

}  // namespace privproj
