#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace mbadmm {

/// Dense vector of finite doubles.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t n, double value = 0.0);
  explicit Vector(std::vector<double> values);
  Vector(std::initializer_list<double> values);

  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }

  std::span<const double> span() const noexcept { return data_; }
  std::span<double> span() noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> data_;
};

/// Dense row-major matrix of finite doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double value = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }
  bool is_square() const noexcept { return rows_ == cols_; }

  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * cols_, cols_);
  }
  std::span<const double> span() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Basic kernels. Reductions always run in index order so results are
// bit-reproducible.

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> v);
double norm_sq(std::span<const double> v);

Vector operator+(const Vector& a, const Vector& b);
Vector operator-(const Vector& a, const Vector& b);
Vector operator*(double s, const Vector& v);
/// y += s * x
void axpy(double s, const Vector& x, Vector& y);

Vector multiply(const Matrix& a, const Vector& x);
/// aᵀ x
Vector multiply_transposed(const Matrix& a, const Vector& x);
Matrix multiply(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
/// aᵀ a
Matrix gram(const Matrix& a);
/// a + s * b
Matrix add_scaled(const Matrix& a, double s, const Matrix& b);

bool is_symmetric(const Matrix& a, double tol = 1e-12);
bool is_diagonal(const Matrix& a);

/// Lower-triangular Cholesky factor of an SPD matrix, reusable for many solves.
class Cholesky {
 public:
  /// Throws FactorizationError when a pivot drops to 1e-12 or below.
  explicit Cholesky(const Matrix& m);

  std::size_t size() const noexcept { return n_; }
  Vector solve(const Vector& rhs) const;

 private:
  std::size_t n_;
  bool diagonal_ = false;
  std::vector<double> lower_;
};

/// λmax(AᵀA) by power iteration from a fixed start.
double spectral_norm_sq(const Matrix& a);

/// λmin of a symmetric positive semidefinite matrix.
double min_eigenvalue_spd(const Matrix& q);

Vector solve_spd(const Matrix& m, const Vector& rhs);

}  // namespace mbadmm
