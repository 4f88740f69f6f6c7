#include "mbadmm/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mbadmm/errors.hpp"

namespace mbadmm {
namespace {

void require_shape(const Problem& problem, const BlockVectors& u, const char* op) {
  if (u.size() != problem.num_blocks()) {
    throw DimensionError(std::string(op) + ": expected " + std::to_string(problem.num_blocks()) +
                         " blocks, got " + std::to_string(u.size()));
  }
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i].size() != problem.blocks[i].dim()) {
      throw DimensionError(std::string(op) + ": " + block_name(i) + " has length " +
                           std::to_string(u[i].size()) + ", expected " +
                           std::to_string(problem.blocks[i].dim()));
    }
  }
}

void validate_block(const BlockSpec& block, std::size_t i, ValidationReport& report) {
  auto issue = [&](std::string msg) { report.push_back({i, block_name(i) + ": " + std::move(msg)}); };
  const std::size_t n = block.dim();
  if (n == 0) {
    issue("dimension must be positive");
    return;
  }
  if (block.Q.rows() != n || block.Q.cols() != n) {
    issue("Q is " + std::to_string(block.Q.rows()) + "x" + std::to_string(block.Q.cols()) +
          ", expected " + std::to_string(n) + "x" + std::to_string(n));
    return;
  }
  if (!std::isfinite(block.constant)) issue("constant is not finite");
  if (!is_symmetric(block.Q, 1e-12)) {
    issue("Q is not symmetric");
    return;
  }
  std::optional<double> lmin;
  try {
    lmin = min_eigenvalue_spd(block.Q);
  } catch (const NotPsdError& e) {
    issue("Q is not PSD (lambda_min = " + std::to_string(e.min_eigenvalue()) + ")");
  } catch (const Error& e) {
    issue(std::string("Q eigenvalue computation failed: ") + e.what());
  }
  if (const auto* box = std::get_if<Box>(&block.set)) {
    if (box->lo.size() != n || box->hi.size() != n) {
      issue("box bounds must have length " + std::to_string(n));
    } else {
      for (std::size_t j = 0; j < n; ++j) {
        if (box->lo[j] > box->hi[j]) {
          issue("box lower bound exceeds upper bound at component " + std::to_string(j));
          break;
        }
      }
    }
  }
  if (block.sigma) {
    const double s = *block.sigma;
    if (!std::isfinite(s) || s < 0.0) {
      issue("sigma must be a nonnegative finite number");
    } else if (lmin && s > *lmin + 1e-8) {
      issue("sigma " + std::to_string(s) + " exceeds lambda_min(Q) = " + std::to_string(*lmin));
    }
  }
}

}  // namespace

std::string block_name(std::size_t index) { return "block " + std::to_string(index + 1); }

Vector Box::project(const Vector& x) const {
  if (x.size() != lo.size()) throw DimensionError("Box::project: size mismatch");
  Vector p = x;
  for (std::size_t j = 0; j < x.size(); ++j) p[j] = std::clamp(x[j], lo[j], hi[j]);
  return p;
}

double BlockSpec::value(const Vector& x) const {
  const Vector qx = multiply(Q, x);
  return 0.5 * dot(x.span(), qx.span()) + dot(q.span(), x.span()) + constant;
}

Vector BlockSpec::gradient(const Vector& x) const { return multiply(Q, x) + q; }

ValidationReport validate(const Problem& problem) {
  ValidationReport report;
  const std::size_t n_blocks = problem.num_blocks();
  if (n_blocks < 2) report.push_back({std::nullopt, "problem needs at least 2 blocks"});
  if (problem.A.size() != n_blocks) {
    report.push_back({std::nullopt, "expected " + std::to_string(n_blocks) + " coupling matrices, got " +
                                        std::to_string(problem.A.size())});
  }
  if (problem.b.empty()) report.push_back({std::nullopt, "right-hand side b is empty"});
  const std::size_t p = problem.rows();
  for (std::size_t i = 0; i < n_blocks; ++i) {
    validate_block(problem.blocks[i], i, report);
    if (i < problem.A.size()) {
      const Matrix& a = problem.A[i];
      if (a.rows() != p) {
        report.push_back({i, block_name(i) + ": dimension mismatch, A has " + std::to_string(a.rows()) +
                                 " rows but b has length " + std::to_string(p)});
      }
      if (a.cols() != problem.blocks[i].dim()) {
        report.push_back({i, block_name(i) + ": dimension mismatch, A has " + std::to_string(a.cols()) +
                                 " columns but block dimension is " +
                                 std::to_string(problem.blocks[i].dim())});
      }
    }
  }
  return report;
}

void require_valid(const Problem& problem) {
  const ValidationReport report = validate(problem);
  if (report.empty()) return;
  std::string msg = "invalid problem:";
  for (const auto& issue : report) msg += "\n  " + issue.message;
  throw ValidationError(msg);
}

double objective(const Problem& problem, const BlockVectors& u) {
  require_shape(problem, u, "objective");
  double f = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) f += problem.blocks[i].value(u[i]);
  return f;
}

ConstraintViolation constraint_violation(const Problem& problem, const BlockVectors& u) {
  require_shape(problem, u, "constraint_violation");
  Vector r(problem.rows());
  for (std::size_t i = 0; i < u.size(); ++i) r = r + multiply(problem.A[i], u[i]);
  r = r - problem.b;
  const double n = norm(r.span());
  return {std::move(r), n};
}

double KktResidual::max_component() const {
  double m = primal_feasibility;
  for (double s : stationarity) m = std::max(m, s);
  return m;
}

KktResidual kkt_residual(const Problem& problem, const BlockVectors& u, const Vector& lambda) {
  require_shape(problem, u, "kkt_residual");
  if (lambda.size() != problem.rows()) throw DimensionError("kkt_residual: lambda has wrong length");
  KktResidual out;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const BlockSpec& block = problem.blocks[i];
    const Vector g = block.gradient(u[i]) - multiply_transposed(problem.A[i], lambda);
    if (const auto* box = std::get_if<Box>(&block.set)) {
      out.stationarity.push_back(norm((u[i] - box->project(u[i] - g)).span()));
    } else {
      out.stationarity.push_back(norm(g.span()));
    }
  }
  out.primal_feasibility = constraint_violation(problem, u).norm;
  return out;
}

double resolved_sigma(const Problem& problem, std::size_t block) {
  const BlockSpec& spec = problem.blocks.at(block);
  if (spec.sigma) return *spec.sigma;
  return std::max(0.0, min_eigenvalue_spd(spec.Q));
}

double residual_weight(std::size_t num_blocks, std::size_t block_one_based) {
  const auto n = static_cast<double>(num_blocks);
  const auto i = static_cast<double>(block_one_based);
  return (2.0 * n - i) * (i - 1.0) / 2.0;
}

double gamma_bound(const Problem& problem, GammaMode mode) {
  const std::size_t n = problem.num_blocks();
  if (mode == GammaMode::Monotonicity && n != 3) {
    throw UnsupportedError("gamma_bound: the monotonicity bound is only available for N = 3, got N = " +
                           std::to_string(n));
  }
  if (n == 2) return std::numeric_limits<double>::infinity();
  if (n < 2) throw ValidationError("gamma_bound: problem needs at least 2 blocks");

  double bound = std::numeric_limits<double>::infinity();
  for (std::size_t idx = 1; idx < n; ++idx) {
    const std::size_t i = idx + 1;  // 1-based block number
    const double sigma = resolved_sigma(problem, idx);
    if (!(sigma > 0.0)) {
      throw NoGuaranteeError("gamma_bound: " + block_name(idx) +
                                 " is not strongly convex (sigma = 0); no step-size guarantee exists",
                             idx);
    }
    const double lmax = spectral_norm_sq(problem.A[idx]);
    if (lmax == 0.0) continue;
    double term;
    if (mode == GammaMode::Monotonicity) {
      term = sigma / lmax;
    } else {
      const std::size_t coeff = i < n ? (2 * n - i) * (i - 1) : (n - 2) * (n + 1);
      term = 2.0 * sigma / (static_cast<double>(coeff) * lmax);
    }
    bound = std::min(bound, term);
  }
  return bound;
}

}  // namespace mbadmm
