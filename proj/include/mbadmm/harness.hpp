#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mbadmm/problem.hpp"

namespace mbadmm {

/// Parameters of a random strongly convex QP with a planted KKT point.
struct GeneratorSpec {
  std::uint64_t seed = 0;
  std::size_t num_blocks = 3;
  std::vector<std::size_t> dims{5, 5, 5};
  std::size_t rows = 3;
  std::pair<double, double> sigma_range{1.0, 2.0};
  double matrix_scale = 1.0;
  double solution_scale = 1.0;
  /// Block 1 gets a rank-deficient Q_1 (σ_1 = 0).
  bool singular_first_block = false;
};

void check_generator_spec(const GeneratorSpec& spec);

struct OracleSolution {
  BlockVectors u_star;
  Vector lambda_star;
  double f_star = 0.0;
};

struct GeneratedInstance {
  Problem problem;
  OracleSolution oracle;
};

/// Name of the random source recorded in experiment reports.
inline constexpr const char* kRngAlgorithm = "mt19937_64, per-matrix streams seeded by splitmix64(seed ^ splitmix64(stream))";

/// Deterministic in the seed. Q_i = B_iᵀB_i + σ_i I, q_i and b chosen so the
/// drawn (u*, λ*) satisfies the KKT system exactly.
GeneratedInstance generate_qp(const GeneratorSpec& spec);

/// Solves the stacked KKT system [blockdiag(Q), −Aᵀ; A, 0] directly.
/// Only for problems whose blocks are all FullSpace.
OracleSolution oracle_solve_eq_qp(const Problem& problem);

}  // namespace mbadmm
