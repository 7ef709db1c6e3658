#include "privproj/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "privproj/error.hpp"

namespace privproj {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::WeightMismatch: return "WeightMismatch";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyTrainClass: return "EmptyTrainClass";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownCategory: return "UnknownCategory";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

// ---------------------------------------------------------------- Matrix

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.front().size();
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (rows[i].size() != c) fail(ErrorCode::DimensionMismatch, "ragged row data");
    for (std::size_t j = 0; j < c; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t j = 0; j < cols_; ++j)
    for (std::size_t i = 0; i < rows_; ++i) t(j, i) = (*this)(i, j);
  return t;
}

double Matrix::max_abs() const noexcept {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    fail(ErrorCode::DimensionMismatch,
         fmt::format("cannot multiply {}x{} by {}x{}", a.rows(), a.cols(), b.rows(), b.cols()));
  Matrix c(a.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    auto cj = c.col(j);
    for (std::size_t p = 0; p < a.cols(); ++p) {
      const double bpj = b(p, j);
      if (bpj == 0.0) continue;
      auto ap = a.col(p);
      for (std::size_t i = 0; i < a.rows(); ++i) cj[i] += ap[i] * bpj;
    }
  }
  return c;
}

Matrix transpose_times(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows())
    fail(ErrorCode::DimensionMismatch,
         fmt::format("cannot form A^T B with {} vs {} rows", a.rows(), b.rows()));
  Matrix c(a.cols(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    auto bj = b.col(j);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      auto ai = a.col(i);
      c(i, j) = std::inner_product(ai.begin(), ai.end(), bj.begin(), 0.0);
    }
  }
  return c;
}

// ---------------------------------------------------------------- SymMatrix

SymMatrix::SymMatrix(std::size_t dim) : dim_(dim), data_(dim * dim, 0.0) {}

SymMatrix SymMatrix::identity(std::size_t dim) {
  SymMatrix s(dim);
  s.add_identity(1.0);
  return s;
}

SymMatrix SymMatrix::diagonal(std::span<const double> diag) {
  SymMatrix s(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) s.set(i, i, diag[i]);
  return s;
}

SymMatrix SymMatrix::from_dense(const Matrix& a) {
  if (a.rows() != a.cols())
    fail(ErrorCode::DimensionMismatch, fmt::format("{}x{} is not square", a.rows(), a.cols()));
  SymMatrix s(a.rows());
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i <= j; ++i) s.set(i, j, 0.5 * (a(i, j) + a(j, i)));
  return s;
}

void SymMatrix::add_outer(std::span<const double> v, double alpha) {
  if (v.size() != dim_)
    fail(ErrorCode::DimensionMismatch, fmt::format("outer product of length {} into dim {}", v.size(), dim_));
  for (std::size_t j = 0; j < dim_; ++j) {
    const double s = alpha * v[j];
    if (s == 0.0) continue;
    double* colj = data_.data() + j * dim_;
    for (std::size_t i = 0; i < dim_; ++i) colj[i] += v[i] * s;
  }
}

void SymMatrix::add_identity(double alpha) {
  for (std::size_t i = 0; i < dim_; ++i) data_[i * dim_ + i] += alpha;
}

double SymMatrix::max_abs() const noexcept {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double SymMatrix::trace() const noexcept {
  double t = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) t += data_[i * dim_ + i];
  return t;
}

Matrix SymMatrix::to_dense() const {
  Matrix m(dim_, dim_);
  for (std::size_t j = 0; j < dim_; ++j)
    for (std::size_t i = 0; i < dim_; ++i) m(i, j) = (*this)(i, j);
  return m;
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& other) {
  if (other.dim_ != dim_)
    fail(ErrorCode::DimensionMismatch, fmt::format("adding dim {} to dim {}", other.dim_, dim_));
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

SymMatrix& SymMatrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

// ---------------------------------------------------------------- Cholesky

void LowerTriangular::solve_lower(Matrix& rhs) const {
  const std::size_t n = dim();
  if (rhs.rows() != n) fail(ErrorCode::DimensionMismatch, "triangular solve row mismatch");
  for (std::size_t c = 0; c < rhs.cols(); ++c) {
    auto y = rhs.col(c);
    for (std::size_t i = 0; i < n; ++i) {
      double s = y[i];
      for (std::size_t p = 0; p < i; ++p) s -= l_(i, p) * y[p];
      y[i] = s / l_(i, i);
    }
  }
}

void LowerTriangular::solve_upper(Matrix& rhs) const {
  const std::size_t n = dim();
  if (rhs.rows() != n) fail(ErrorCode::DimensionMismatch, "triangular solve row mismatch");
  for (std::size_t c = 0; c < rhs.cols(); ++c) {
    auto y = rhs.col(c);
    for (std::size_t i = n; i-- > 0;) {
      double s = y[i];
      auto li = l_.col(i);  // column i of L is row i of L^T
      for (std::size_t p = i + 1; p < n; ++p) s -= li[p] * y[p];
      y[i] = s / l_(i, i);
    }
  }
}

LowerTriangular cholesky(const SymMatrix& b) {
  const std::size_t n = b.dim();
  if (n == 0) fail(ErrorCode::InvalidArgument, "empty matrix");
  const double threshold = static_cast<double>(n) * 1e-14 * b.max_abs();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = b(j, j);
    for (std::size_t p = 0; p < j; ++p) d -= l(j, p) * l(j, p);
    if (!(d > threshold))
      fail(ErrorCode::NotPositiveDefinite,
           fmt::format("pivot {} is {:.3e} (threshold {:.3e}); increase rho", j, d, threshold));
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = b(i, j);
      for (std::size_t p = 0; p < j; ++p) s -= l(i, p) * l(j, p);
      l(i, j) = s / ljj;
    }
  }
  return LowerTriangular(std::move(l));
}

// ---------------------------------------------------------------- Jacobi

void sign_normalize_columns(Matrix& m) {
  for (std::size_t c = 0; c < m.cols(); ++c) {
    auto v = m.col(c);
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
      if (std::abs(v[i]) > std::abs(v[best])) best = i;
    if (!v.empty() && v[best] < 0.0)
      for (double& x : v) x = -x;
  }
}

namespace {

constexpr int kMaxSweeps = 100;

double max_off_diagonal(const Matrix& a) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < j; ++i) m = std::max(m, std::abs(a(i, j)));
  return m;
}

EigenPairs sorted_pairs(const Matrix& diag_source, const Matrix& vectors, std::size_t keep) {
  const std::size_t n = diag_source.rows();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return diag_source(x, x) > diag_source(y, y);
  });
  EigenPairs out;
  out.values.resize(keep);
  out.vectors = Matrix(vectors.rows(), keep);
  for (std::size_t c = 0; c < keep; ++c) {
    out.values[c] = diag_source(order[c], order[c]);
    auto src = vectors.col(order[c]);
    std::copy(src.begin(), src.end(), out.vectors.col(c).begin());
  }
  return out;
}

// Diagonalizes `a` in place; returns the accumulated rotations.
Matrix jacobi_diagonalize(Matrix& a) {
  const std::size_t n = a.rows();
  Matrix v = Matrix::identity(n);
  const double tol = 1e-14 * a.max_abs();

  for (int sweep = 0;; ++sweep) {
    if (max_off_diagonal(a) <= tol) return v;
    if (sweep == kMaxSweeps)
      fail(ErrorCode::NoConvergence,
           fmt::format("Jacobi did not converge in {} sweeps (off-diagonal {:.3e}, tol {:.3e})",
                       kMaxSweeps, max_off_diagonal(a), tol));

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        // A <- J^T A J, columns then rows.
        auto cp = a.col(p);
        auto cq = a.col(q);
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = cp[k];
          const double akq = cq[k];
          cp[k] = c * akp - s * akq;
          cq[k] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;

        auto vp = v.col(p);
        auto vq = v.col(q);
        for (std::size_t k = 0; k < n; ++k) {
          const double x = vp[k];
          const double y = vq[k];
          vp[k] = c * x - s * y;
          vq[k] = s * x + c * y;
        }
      }
    }
  }
}

}  // namespace

EigenPairs sym_eig(const SymMatrix& a) {
  if (a.dim() == 0) fail(ErrorCode::InvalidArgument, "empty matrix");
  Matrix work = a.to_dense();
  Matrix v = jacobi_diagonalize(work);
  EigenPairs out = sorted_pairs(work, v, a.dim());
  sign_normalize_columns(out.vectors);
  return out;
}

EigenPairs generalized_eig(const SymMatrix& a, const SymMatrix& b, std::size_t k) {
  if (a.dim() != b.dim())
    fail(ErrorCode::DimensionMismatch, fmt::format("pencil dims {} and {}", a.dim(), b.dim()));
  if (k == 0 || k > a.dim())
    fail(ErrorCode::InvalidK, fmt::format("k = {} outside 1..{}", k, a.dim()));

  const LowerTriangular l = cholesky(b);

  // C = L^-1 A L^-T, formed as L^-1 (L^-1 A)^T since A is symmetric.
  Matrix y = a.to_dense();
  l.solve_lower(y);
  Matrix c = y.transpose();
  l.solve_lower(c);
  const SymMatrix reduced = SymMatrix::from_dense(c);

  Matrix work = reduced.to_dense();
  Matrix v = jacobi_diagonalize(work);
  EigenPairs out = sorted_pairs(work, v, k);

  l.solve_upper(out.vectors);  // w = L^-T v
  sign_normalize_columns(out.vectors);
  return out;
}

Matrix orthonormalize_columns(const Matrix& a, double pivot_tol) {
  Matrix q = a;
  for (std::size_t j = 0; j < q.cols(); ++j) {
    auto qj = q.col(j);
    const double original = std::sqrt(std::inner_product(qj.begin(), qj.end(), qj.begin(), 0.0));
    for (std::size_t i = 0; i < j; ++i) {
      auto qi = q.col(i);
      const double r = std::inner_product(qi.begin(), qi.end(), qj.begin(), 0.0);
      for (std::size_t t = 0; t < qj.size(); ++t) qj[t] -= r * qi[t];
    }
    const double norm = std::sqrt(std::inner_product(qj.begin(), qj.end(), qj.begin(), 0.0));
    if (original == 0.0 || norm < pivot_tol * original)
      fail(ErrorCode::RankDeficient, fmt::format("column {} is linearly dependent", j));
    for (double& x : qj) x /= norm;
  }
  return q;
}

}  // namespace privproj
