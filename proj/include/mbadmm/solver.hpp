#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mbadmm/diagnostics.hpp"
#include "mbadmm/linalg.hpp"
#include "mbadmm/problem.hpp"

namespace mbadmm {

struct ExplicitGamma {
  double value = 1.0;
};

struct AutoGamma {
  GammaMode mode = GammaMode::Convergence;
  double safety = 0.99;
};

struct SolverConfig {
  std::variant<ExplicitGamma, AutoGamma> gamma = AutoGamma{};
  std::size_t max_iters = 10'000;
  double tol_R = 1e-12;
  /// Empty means zeros.
  std::optional<BlockVectors> init_x;
  std::optional<Vector> init_lambda;
  std::size_t box_inner_budget = 500;
  /// Re-checks every block's subproblem optimality after each sweep.
  bool verify_subproblems = false;
};

/// Throws ValidationError when the config violates its invariants.
void check_config(const SolverConfig& config);

enum class WarningKind { GammaAboveBound, NoGammaGuarantee, BoxBudgetExhausted };

struct SolverWarning {
  WarningKind kind;
  std::string message;
};

/// Which rate guarantees the resolved γ falls under.
struct Guarantees {
  bool ergodic_rate = false;     // O(1/t) ergodic objective and feasibility
  bool monotone_residual = false;  // R_{k+1} ≤ R_k (N = 3 only)
  bool small_o_residual = false;   // R_k = o(1/k)
};

struct IterateState {
  std::size_t k = 0;
  BlockVectors x;
  Vector lambda;
  /// A_i x_i^{k-1}; at k = 0 these are the images of the initial point.
  BlockVectors prev_images;
  /// A_i x_i^k
  BlockVectors images;
  /// Running means of iterates 1..k; empty before the first sweep.
  std::optional<ErgodicState> ergodic;
};

struct SubproblemResult {
  Vector x;
  /// Unit-step projected-gradient norm (plain gradient norm on free blocks).
  double residual = 0.0;
  bool budget_exhausted = false;
};

/// Gradient norm of block i's subproblem at x; projected for box blocks.
/// `partial_sum` is Σ_{j≠i} A_j x_j − b, without the λ/γ term.
double subproblem_residual(const Problem& problem, std::size_t block, double gamma,
                           const Vector& partial_sum, const Vector& lambda, const Vector& x);

/// argmin_x f_i(x) − λᵀA_i x + (γ/2)‖A_i x + partial_sum‖² over X_i.
SubproblemResult block_subproblem_solve(const Problem& problem, std::size_t block, double gamma,
                                        const Vector& partial_sum, const Vector& lambda,
                                        std::size_t box_inner_budget = 500);

/// λ − γ · violation
Vector dual_update(const Vector& lambda, double gamma, const Vector& violation);

/// R = ‖Σ A_i x_i − b‖² + Σ_{i≥2} (2N−i)(i−1)/2 ‖A_i x_i^{prev} − A_i x_i‖².
double residual_R(const Problem& problem, const BlockVectors& prev_images, const BlockVectors& images);

/// Output of one sweep besides the new state.
struct SweepInfo {
  bool budget_exhausted = false;
  /// Worst subproblem residual re-measured after the sweep (only when verifying).
  double max_subproblem_residual = 0.0;
};

namespace detail {

/// Block i's subproblem Hessian Q_i + γ A_iᵀA_i and what is needed to minimise over it.
struct BlockSystem {
  Matrix hessian;
  std::optional<Cholesky> factor;
  bool diagonal = false;
  double lipschitz = 0.0;  // λmax(hessian), non-diagonal box blocks only
};

BlockSystem build_block_system(const Problem& problem, std::size_t block, double gamma);

}  // namespace detail

/// Gauss-Seidel ADMM at a fixed γ; holds the per-block factorizations of
/// Q_i + γ A_iᵀA_i.
class AdmmSolver {
 public:
  /// The problem must outlive the solver.
  AdmmSolver(const Problem& problem, double gamma, std::size_t box_inner_budget = 500);

  double gamma() const noexcept { return gamma_; }
  const Problem& problem() const noexcept { return problem_; }

  IterateState initial_state(const std::optional<BlockVectors>& x0 = std::nullopt,
                             const std::optional<Vector>& lambda0 = std::nullopt) const;

  /// One sweep over blocks 1..N followed by the dual update.
  IterateState step(const IterateState& state, SweepInfo* info = nullptr, bool verify = false) const;

  SubproblemResult solve_block(std::size_t block, const Vector& partial_sum, const Vector& lambda,
                               const Vector& warm_start) const;

 private:
  const Problem& problem_;
  double gamma_;
  std::size_t box_inner_budget_;
  std::vector<detail::BlockSystem> systems_;
};

IterateState admm_step(const Problem& problem, double gamma, const IterateState& state);

enum class StopReason { Tolerance, MaxIters };

struct Solution {
  BlockVectors u;
  Vector lambda;
  std::size_t iterations = 0;
  StopReason stop_reason = StopReason::MaxIters;
  double final_R = 0.0;
};

struct Trace {
  double gamma = 0.0;
  std::vector<IterationRecord> records;
  std::vector<SolverWarning> warnings;
  Guarantees guarantees;
  /// Per-sweep worst subproblem residual; filled only when verifying.
  std::vector<double> subproblem_residuals;
  /// Final ergodic means (iterates 1..K).
  std::optional<ErgodicState> ergodic;

  bool has_warning(WarningKind kind) const;
};

struct SolveResult {
  Solution solution;
  Trace trace;
};

/// Resolves γ from the config: explicit value, or safety × gamma_bound.
double resolve_gamma(const Problem& problem, const SolverConfig& config);

/// Runs ADMM until R_k ≤ tol_R or max_iters. When `f_star` is given the
/// trace carries objective errors.
SolveResult solve(const Problem& problem, const SolverConfig& config,
                  std::optional<double> f_star = std::nullopt);

std::string to_string(StopReason reason);
std::string to_string(WarningKind kind);

}  // namespace mbadmm
