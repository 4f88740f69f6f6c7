#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mbadmm/linalg.hpp"

namespace mbadmm {

struct FullSpace {
  friend bool operator==(const FullSpace&, const FullSpace&) = default;
};

struct Box {
  Vector lo;
  Vector hi;

  Vector project(const Vector& x) const;
  friend bool operator==(const Box&, const Box&) = default;
};

using FeasibleSet = std::variant<FullSpace, Box>;

/// One block f_i(x) = ½xᵀQx + qᵀx + constant restricted to `set`.
struct BlockSpec {
  Matrix Q;
  Vector q;
  double constant = 0.0;
  FeasibleSet set = FullSpace{};
  /// Strong-convexity parameter; when absent, λmin(Q) is used.
  std::optional<double> sigma;

  std::size_t dim() const noexcept { return q.size(); }
  bool is_box() const noexcept { return std::holds_alternative<Box>(set); }
  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;

  friend bool operator==(const BlockSpec&, const BlockSpec&) = default;
};

/// min Σ f_i(x_i)  s.t.  Σ A_i x_i = b,  x_i ∈ X_i.
struct Problem {
  std::vector<BlockSpec> blocks;
  std::vector<Matrix> A;
  Vector b;

  std::size_t num_blocks() const noexcept { return blocks.size(); }
  std::size_t rows() const noexcept { return b.size(); }

  friend bool operator==(const Problem&, const Problem&) = default;
};

/// Stacked primal point u = (x_1, ..., x_N).
using BlockVectors = std::vector<Vector>;

struct ValidationIssue {
  /// 0-based block index, or nullopt for problem-level issues.
  std::optional<std::size_t> block;
  std::string message;
};

using ValidationReport = std::vector<ValidationIssue>;

ValidationReport validate(const Problem& problem);
/// Throws ValidationError listing every issue when the report is nonempty.
void require_valid(const Problem& problem);

double objective(const Problem& problem, const BlockVectors& u);

struct ConstraintViolation {
  Vector vector;
  double norm = 0.0;
};

ConstraintViolation constraint_violation(const Problem& problem, const BlockVectors& u);

struct KktResidual {
  std::vector<double> stationarity;
  double primal_feasibility = 0.0;

  double max_component() const;
};

KktResidual kkt_residual(const Problem& problem, const BlockVectors& u, const Vector& lambda);

enum class GammaMode { Convergence, Monotonicity };

/// σ_i for block i: the provided sigma, else λmin(Q_i).
double resolved_sigma(const Problem& problem, std::size_t block);

/// Largest penalty γ covered by the rate guarantees; +inf for N = 2.
double gamma_bound(const Problem& problem, GammaMode mode);

/// Weight (2N−i)(i−1)/2 of block i (1-based) in the residual R_k.
double residual_weight(std::size_t num_blocks, std::size_t block_one_based);

/// Formats a 0-based block index as it is named in messages ("block 2").
std::string block_name(std::size_t index);

}  // namespace mbadmm
