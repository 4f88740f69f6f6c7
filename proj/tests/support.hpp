#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "mbadmm/problem.hpp"

namespace testing {

using namespace mbadmm;

inline BlockSpec scalar_block(double q_val = 0.0, double constant = 0.0) {
  BlockSpec b;
  b.Q = Matrix{{1.0}};
  b.q = Vector{q_val};
  b.constant = constant;
  return b;
}

/// N scalar blocks with Q_i = 1, q_i = 0, A_i = 1; optimum x_i = b/N, λ = b/N.
inline Problem scalar_problem(std::size_t n, double rhs) {
  Problem p;
  for (std::size_t i = 0; i < n; ++i) {
    p.blocks.push_back(scalar_block());
    p.A.push_back(Matrix{{1.0}});
  }
  p.b = Vector{rhs};
  return p;
}

inline Problem three_scalar() { return scalar_problem(3, 3.0); }
inline Problem two_scalar() { return scalar_problem(2, 2.0); }

inline BlockVectors scalars(std::initializer_list<double> xs) {
  BlockVectors out;
  for (double x : xs) out.push_back(Vector{x});
  return out;
}

// Cyclic Jacobi rotations on a dense symmetric matrix; returns all eigenvalues ascending.
inline std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k];
          const double aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a[i][i];
  std::sort(eig.begin(), eig.end());
  return eig;
}

inline std::vector<std::vector<double>> dense(const Matrix& m) {
  std::vector<std::vector<double>> out(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(rows * cols);
  for (double& e : v) e = u(rng);
  return Matrix(rows, cols, std::move(v));
}

inline Vector random_vector(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& e : v) e = u(rng);
  return Vector(std::move(v));
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace testing
