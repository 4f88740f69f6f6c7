#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mbadmm/linalg.hpp"
#include "mbadmm/problem.hpp"

namespace mbadmm {

/// Scalars logged after sweep k.
struct IterationRecord {
  std::size_t k = 0;
  double objective = 0.0;
  double feasibility = 0.0;
  double R = 0.0;
  /// f(ū^{k−1}), the mean of iterates 1..k.
  double ergodic_objective = 0.0;
  double ergodic_feasibility = 0.0;
  std::optional<double> obj_error;
  std::optional<double> ergodic_obj_error;

  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

/// Running means x̄^t, λ̄^t of iterates 1..t+1.
struct ErgodicState {
  std::size_t t = 0;
  BlockVectors mean_x;
  Vector mean_lambda;

  /// State holding a single iterate (t = 0).
  static ErgodicState start(const BlockVectors& x, const Vector& lambda);
};

ErgodicState ergodic_update(const ErgodicState& state, const BlockVectors& x, const Vector& lambda);
/// In-place form used by the solve loop.
void ergodic_update_in_place(ErgodicState& state, const BlockVectors& x, const Vector& lambda);

/// Upper bound on f(ū^t) − f* + ρ‖Σ A_i x̄_i^t − b‖ after t+1 sweeps.
double ergodic_bound_rhs(const Problem& problem, const BlockVectors& x0, const Vector& lambda0,
                         const BlockVectors& x_star, double rho, double gamma, std::size_t t);

struct ErgodicCertificate {
  double rho = 1.0;
  /// C, the t-independent part of the bound numerator besides ρ²/γ.
  double bound_constant = 0.0;
  std::size_t t = 0;
  double bound_value = 0.0;
  double measured_value = 0.0;
  bool satisfied = false;
  bool lower_satisfied = false;
};

/// Evaluates both sides of the ergodic bound for a logged record (t = k − 1).
ErgodicCertificate ergodic_certificate(const Problem& problem, const BlockVectors& x0, const Vector& lambda0,
                                       const BlockVectors& x_star, const Vector& lambda_star, double f_star,
                                       double gamma, const IterationRecord& record);

enum class TraceField {
  Objective,
  Feasibility,
  R,
  ErgodicObjective,
  ErgodicFeasibility,
  ObjError,
  ErgodicObjError,
};

std::optional<TraceField> parse_trace_field(std::string_view name);
std::string_view field_name(TraceField field);
std::optional<double> field_value(const IterationRecord& record, TraceField field);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::pair<std::size_t, std::size_t> window;
  std::size_t samples = 0;
  /// Records in the window whose value was absent, zero or negative.
  std::size_t excluded = 0;
};

/// Least-squares fit of log(value) against log(k) over k ∈ [k_lo, k_hi].
RateFit rate_fit(const std::vector<IterationRecord>& records, TraceField field,
                 std::pair<std::size_t, std::size_t> window);

/// Default window [k_max/10, k_max].
std::pair<std::size_t, std::size_t> default_rate_window(std::size_t k_max);

struct MonotonicityViolation {
  std::size_t k;
  double R_k;
  double R_next;

  friend bool operator==(const MonotonicityViolation&, const MonotonicityViolation&) = default;
};

std::vector<MonotonicityViolation> monotonicity_audit(const std::vector<IterationRecord>& records);

/// (k, k·R_k) at each checkpoint.
std::vector<std::pair<std::size_t, double>> small_o_certificate(const std::vector<IterationRecord>& records,
                                                                const std::vector<std::size_t>& checkpoints);

}  // namespace mbadmm
