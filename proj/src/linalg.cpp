#include "mbadmm/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>

#include "mbadmm/errors.hpp"

namespace mbadmm {
namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw ValidationError(std::string(what) + " contains a non-finite entry");
  }
}

void require_same_size(std::size_t a, std::size_t b, const char* op) {
  if (a != b) {
    throw DimensionError(std::string(op) + ": size mismatch (" + std::to_string(a) + " vs " +
                         std::to_string(b) + ")");
  }
}

constexpr int kPowerMaxIters = 10'000;
constexpr double kPowerRelTol = 1e-12;

// One power-iteration run on AᵀA from `v` (normalised on entry).
double power_run(const Matrix& a, Vector v) {
  double prev = -1.0;
  double mu = 0.0;
  for (int it = 0; it < kPowerMaxIters; ++it) {
    const Vector w = multiply(a, v);
    mu = norm_sq(w.span()) / norm_sq(v.span());
    const Vector z = multiply_transposed(a, w);
    const double zn = norm(z.span());
    if (zn == 0.0) return 0.0;  // v lies in the null space of A
    if (it > 0 && std::abs(mu - prev) <= kPowerRelTol * mu) return mu;
    prev = mu;
    v = (1.0 / zn) * z;
  }
  throw NonConvergenceError("spectral_norm_sq: power iteration did not converge", mu);
}

}  // namespace

Vector::Vector(std::size_t n, double value) : data_(n, value) {
  require_finite(data_, "Vector");
}

Vector::Vector(std::vector<double> values) : data_(std::move(values)) {
  require_finite(data_, "Vector");
}

Vector::Vector(std::initializer_list<double> values) : data_(values) {
  require_finite(data_, "Vector");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, double value)
    : rows_(rows), cols_(cols), data_(rows * cols, value) {
  require_finite(data_, "Matrix");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("Matrix: " + std::to_string(data_.size()) + " entries for a " +
                         std::to_string(rows) + "x" + std::to_string(cols) + " matrix");
  }
  require_finite(data_, "Matrix");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("Matrix: ragged initializer list");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  require_finite(data_, "Matrix");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  require_finite(m.data_, "Matrix");
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm_sq(std::span<const double> v) { return dot(v, v); }

double norm(std::span<const double> v) { return std::sqrt(norm_sq(v)); }

Vector operator+(const Vector& a, const Vector& b) {
  require_same_size(a.size(), b.size(), "vector add");
  Vector r = a;
  for (std::size_t i = 0; i < a.size(); ++i) r[i] += b[i];
  return r;
}

Vector operator-(const Vector& a, const Vector& b) {
  require_same_size(a.size(), b.size(), "vector subtract");
  Vector r = a;
  for (std::size_t i = 0; i < a.size(); ++i) r[i] -= b[i];
  return r;
}

Vector operator*(double s, const Vector& v) {
  Vector r = v;
  for (std::size_t i = 0; i < v.size(); ++i) r[i] *= s;
  return r;
}

void axpy(double s, const Vector& x, Vector& y) {
  require_same_size(x.size(), y.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += s * x[i];
}

Vector multiply(const Matrix& a, const Vector& x) {
  require_same_size(a.cols(), x.size(), "matrix-vector product");
  Vector y(a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) y[r] = dot(a.row(r), x.span());
  return y;
}

Vector multiply_transposed(const Matrix& a, const Vector& x) {
  require_same_size(a.rows(), x.size(), "transposed matrix-vector product");
  Vector y(a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double xr = x[r];
    for (std::size_t c = 0; c < a.cols(); ++c) y[c] += a(r, c) * xr;
  }
  return y;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  require_same_size(a.cols(), b.rows(), "matrix product");
  Matrix m(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) m(i, j) += aik * b(k, j);
    }
  }
  return m;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) t(c, r) = a(r, c);
  return t;
}

Matrix gram(const Matrix& a) {
  Matrix g(a.cols(), a.cols());
  for (std::size_t i = 0; i < a.cols(); ++i) {
    for (std::size_t j = i; j < a.cols(); ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < a.rows(); ++r) s += a(r, i) * a(r, j);
      g(i, j) = s;
      g(j, i) = s;
    }
  }
  return g;
}

Matrix add_scaled(const Matrix& a, double s, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("add_scaled: shape mismatch");
  std::vector<double> v(a.values());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += s * b.values()[i];
  return Matrix(a.rows(), a.cols(), std::move(v));
}

bool is_symmetric(const Matrix& a, double tol) {
  if (!a.is_square()) return false;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      if (std::abs(a(i, j) - a(j, i)) > tol) return false;
  return true;
}

bool is_diagonal(const Matrix& a) {
  if (!a.is_square()) return false;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j && a(i, j) != 0.0) return false;
  return true;
}

Cholesky::Cholesky(const Matrix& m) : n_(m.rows()) {
  if (!m.is_square()) throw DimensionError("Cholesky: matrix is not square");
  // Diagonal input keeps the diagonal itself so solves are a single exact division.
  diagonal_ = is_diagonal(m);
  if (diagonal_) {
    lower_.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      if (!(m(j, j) > 1e-12)) {
        throw FactorizationError("Cholesky: non-positive pivot " + std::to_string(m(j, j)) + " at index " +
                                     std::to_string(j),
                                 j);
      }
      lower_[j] = m(j, j);
    }
    return;
  }
  lower_.assign(n_ * n_, 0.0);
  for (std::size_t j = 0; j < n_; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= lower_[j * n_ + k] * lower_[j * n_ + k];
    if (!(d > 1e-12)) {
      throw FactorizationError("Cholesky: non-positive pivot " + std::to_string(d) + " at index " +
                                   std::to_string(j),
                               j);
    }
    const double ljj = std::sqrt(d);
    lower_[j * n_ + j] = ljj;
    for (std::size_t i = j + 1; i < n_; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= lower_[i * n_ + k] * lower_[j * n_ + k];
      lower_[i * n_ + j] = s / ljj;
    }
  }
}

Vector Cholesky::solve(const Vector& rhs) const {
  require_same_size(n_, rhs.size(), "Cholesky::solve");
  std::vector<double> y(rhs.values());
  if (diagonal_) {
    for (std::size_t i = 0; i < n_; ++i) y[i] /= lower_[i];
    return Vector(std::move(y));
  }
  for (std::size_t i = 0; i < n_; ++i) {
    double s = y[i];
    for (std::size_t k = 0; k < i; ++k) s -= lower_[i * n_ + k] * y[k];
    y[i] = s / lower_[i * n_ + i];
  }
  for (std::size_t ii = n_; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < n_; ++k) s -= lower_[k * n_ + ii] * y[k];
    y[ii] = s / lower_[ii * n_ + ii];
  }
  return Vector(std::move(y));
}

double spectral_norm_sq(const Matrix& a) {
  if (a.empty()) throw DimensionError("spectral_norm_sq: zero-dimension matrix");
  const std::size_t n = a.cols();
  // All-ones start; a second fixed start covers the case where the ones
  // vector is orthogonal to the dominant eigenvector.
  Vector ones(n, 1.0 / std::sqrt(static_cast<double>(n)));
  Vector alt(n);
  for (std::size_t i = 0; i < n; ++i) alt[i] = (i % 2 == 0 ? 1.0 : -1.0) * (1.0 + 0.5 * std::sin(1.0 + i));
  alt = (1.0 / norm(alt.span())) * alt;
  return std::max(power_run(a, std::move(ones)), power_run(a, std::move(alt)));
}

double min_eigenvalue_spd(const Matrix& q) {
  if (q.empty()) throw DimensionError("min_eigenvalue_spd: zero-dimension matrix");
  if (!q.is_square()) throw DimensionError("min_eigenvalue_spd: matrix is not square");
  if (!is_symmetric(q, 1e-12)) throw ValidationError("min_eigenvalue_spd: matrix is not symmetric");
  const auto n = static_cast<Eigen::Index>(q.rows());
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
      q.values().data(), n, n);
  const Eigen::MatrixXd dense = m;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError("min_eigenvalue_spd: eigensolver failed");
  const double lmin = eig.eigenvalues()(0);
  const double scale = std::max(1.0, dense.cwiseAbs().maxCoeff());
  if (lmin < -1e-10 * scale) {
    throw NotPsdError("min_eigenvalue_spd: matrix is not positive semidefinite (lambda_min = " +
                          std::to_string(lmin) + ")",
                      lmin);
  }
  return lmin;
}

Vector solve_spd(const Matrix& m, const Vector& rhs) { return Cholesky(m).solve(rhs); }

}  // namespace mbadmm
