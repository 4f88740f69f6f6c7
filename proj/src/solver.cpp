#include "mbadmm/solver.hpp"

#include <algorithm>
#include <cmath>

#include "mbadmm/errors.hpp"

namespace mbadmm {
namespace {

constexpr double kBoxTolerance = 1e-7;

// Σ_{j≠skip} images[j] − b, summed in block order.
Vector partial_sum(const BlockVectors& images, const Vector& b, std::size_t skip) {
  Vector s(b.size());
  for (std::size_t j = 0; j < images.size(); ++j)
    if (j != skip) s = s + images[j];
  return s - b;
}

Vector total_violation(const BlockVectors& images, const Vector& b) {
  Vector s(b.size());
  for (const auto& img : images) s = s + img;
  return s - b;
}

// Right-hand side of H x = rhs: Aᵀ(λ − γ·partial) − q.
Vector subproblem_rhs(const Problem& problem, std::size_t block, double gamma, const Vector& partial,
                      const Vector& lambda) {
  Vector shifted = lambda;
  axpy(-gamma, partial, shifted);
  return multiply_transposed(problem.A[block], shifted) - problem.blocks[block].q;
}

double projected_residual(const Box& box, const Vector& x, const Vector& grad) {
  return norm((x - box.project(x - grad)).span());
}

SubproblemResult minimise_block(const Problem& problem, std::size_t block, const detail::BlockSystem& sys,
                                double gamma, const Vector& partial, const Vector& lambda,
                                const Vector& warm_start, std::size_t budget) {
  const Vector rhs = subproblem_rhs(problem, block, gamma, partial, lambda);
  const BlockSpec& spec = problem.blocks[block];
  SubproblemResult out;
  if (!spec.is_box()) {
    out.x = sys.factor->solve(rhs);
    out.residual = norm((multiply(sys.hessian, out.x) - rhs).span());
    return out;
  }
  const Box& box = std::get<Box>(spec.set);
  if (sys.diagonal) {
    out.x = Vector(rhs.size());
    for (std::size_t j = 0; j < rhs.size(); ++j)
      out.x[j] = std::clamp(rhs[j] / sys.hessian(j, j), box.lo[j], box.hi[j]);
    out.residual = projected_residual(box, out.x, multiply(sys.hessian, out.x) - rhs);
    return out;
  }
  // Projected gradient with step 1/L, warm-started at the previous iterate.
  const double step = 1.0 / sys.lipschitz;
  Vector x = box.project(warm_start);
  Vector grad = multiply(sys.hessian, x) - rhs;
  double res = projected_residual(box, x, grad);
  for (std::size_t it = 0; it < budget && res > kBoxTolerance; ++it) {
    Vector trial = x;
    axpy(-step, grad, trial);
    x = box.project(trial);
    grad = multiply(sys.hessian, x) - rhs;
    res = projected_residual(box, x, grad);
  }
  out.x = std::move(x);
  out.residual = res;
  out.budget_exhausted = res > kBoxTolerance;
  return out;
}

}  // namespace

namespace detail {

BlockSystem build_block_system(const Problem& problem, std::size_t block, double gamma) {
  const BlockSpec& spec = problem.blocks.at(block);
  BlockSystem sys;
  sys.hessian = add_scaled(spec.Q, gamma, gram(problem.A.at(block)));
  sys.diagonal = is_diagonal(sys.hessian);
  try {
    if (!spec.is_box() || !sys.diagonal) sys.factor.emplace(sys.hessian);
  } catch (const FactorizationError& e) {
    throw NumericalError(block_name(block) + ": subproblem matrix Q + gamma A^T A is not positive definite (" +
                         e.what() + ")");
  }
  if (spec.is_box()) {
    if (sys.diagonal) {
      for (std::size_t j = 0; j < spec.dim(); ++j) {
        if (!(sys.hessian(j, j) > 1e-12)) {
          throw NumericalError(block_name(block) + ": subproblem matrix is singular at component " +
                               std::to_string(j));
        }
      }
    } else {
      sys.lipschitz = std::sqrt(spectral_norm_sq(sys.hessian));
    }
  }
  return sys;
}

}  // namespace detail

void check_config(const SolverConfig& config) {
  if (const auto* g = std::get_if<ExplicitGamma>(&config.gamma)) {
    if (!(g->value > 0.0) || !std::isfinite(g->value)) throw ValidationError("explicit gamma must be positive");
  } else {
    const double s = std::get<AutoGamma>(config.gamma).safety;
    if (!(s > 0.0 && s <= 1.0)) throw ValidationError("auto gamma safety factor must lie in (0, 1]");
  }
  if (config.max_iters < 1) throw ValidationError("max_iters must be at least 1");
  if (!(config.tol_R >= 0.0)) throw ValidationError("tol_R must be nonnegative");
}

double subproblem_residual(const Problem& problem, std::size_t block, double gamma, const Vector& partial,
                           const Vector& lambda, const Vector& x) {
  const BlockSpec& spec = problem.blocks.at(block);
  const Matrix& a = problem.A.at(block);
  Vector shifted = multiply(a, x) + partial;
  shifted = gamma * shifted - lambda;
  const Vector grad = spec.gradient(x) + multiply_transposed(a, shifted);
  if (const auto* box = std::get_if<Box>(&spec.set)) return projected_residual(*box, x, grad);
  return norm(grad.span());
}

SubproblemResult block_subproblem_solve(const Problem& problem, std::size_t block, double gamma,
                                        const Vector& partial_sum, const Vector& lambda,
                                        std::size_t box_inner_budget) {
  if (!(gamma > 0.0)) throw ValidationError("block_subproblem_solve: gamma must be positive");
  const auto sys = detail::build_block_system(problem, block, gamma);
  const Vector warm(problem.blocks[block].dim());
  return minimise_block(problem, block, sys, gamma, partial_sum, lambda, warm, box_inner_budget);
}

Vector dual_update(const Vector& lambda, double gamma, const Vector& violation) {
  Vector next = lambda;
  axpy(-gamma, violation, next);
  return next;
}

double residual_R(const Problem& problem, const BlockVectors& prev_images, const BlockVectors& images) {
  const std::size_t n = problem.num_blocks();
  if (prev_images.size() != n || images.size() != n) throw DimensionError("residual_R: block count mismatch");
  double r = norm_sq(total_violation(images, problem.b).span());
  for (std::size_t i = 1; i < n; ++i)
    r += residual_weight(n, i + 1) * norm_sq((prev_images[i] - images[i]).span());
  return r;
}

AdmmSolver::AdmmSolver(const Problem& problem, double gamma, std::size_t box_inner_budget)
    : problem_(problem), gamma_(gamma), box_inner_budget_(box_inner_budget) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ValidationError("AdmmSolver: gamma must be positive");
  systems_.reserve(problem.num_blocks());
  for (std::size_t i = 0; i < problem.num_blocks(); ++i)
    systems_.push_back(detail::build_block_system(problem, i, gamma));
}

IterateState AdmmSolver::initial_state(const std::optional<BlockVectors>& x0,
                                       const std::optional<Vector>& lambda0) const {
  IterateState s;
  const std::size_t n = problem_.num_blocks();
  if (x0) {
    if (x0->size() != n) throw DimensionError("initial point has the wrong number of blocks");
    for (std::size_t i = 0; i < n; ++i)
      if ((*x0)[i].size() != problem_.blocks[i].dim())
        throw DimensionError("initial point: " + block_name(i) + " has the wrong length");
    s.x = *x0;
  } else {
    for (const auto& block : problem_.blocks) s.x.emplace_back(block.dim());
  }
  if (lambda0) {
    if (lambda0->size() != problem_.rows()) throw DimensionError("initial multiplier has the wrong length");
    s.lambda = *lambda0;
  } else {
    s.lambda = Vector(problem_.rows());
  }
  for (std::size_t i = 0; i < n; ++i) s.images.push_back(multiply(problem_.A[i], s.x[i]));
  s.prev_images = s.images;
  return s;
}

SubproblemResult AdmmSolver::solve_block(std::size_t block, const Vector& partial, const Vector& lambda,
                                         const Vector& warm_start) const {
  return minimise_block(problem_, block, systems_.at(block), gamma_, partial, lambda, warm_start,
                        box_inner_budget_);
}

IterateState AdmmSolver::step(const IterateState& state, SweepInfo* info, bool verify) const {
  IterateState next;
  next.k = state.k + 1;
  next.x = state.x;
  next.images = state.images;
  SweepInfo local;
  for (std::size_t i = 0; i < problem_.num_blocks(); ++i) {
    const Vector partial = partial_sum(next.images, problem_.b, i);
    SubproblemResult res = solve_block(i, partial, state.lambda, next.x[i]);
    local.budget_exhausted = local.budget_exhausted || res.budget_exhausted;
    if (verify) {
      local.max_subproblem_residual =
          std::max(local.max_subproblem_residual,
                   subproblem_residual(problem_, i, gamma_, partial, state.lambda, res.x));
    }
    next.x[i] = std::move(res.x);
    next.images[i] = multiply(problem_.A[i], next.x[i]);
  }
  next.lambda = dual_update(state.lambda, gamma_, total_violation(next.images, problem_.b));
  next.prev_images = state.images;
  if (state.ergodic) {
    next.ergodic = ergodic_update(*state.ergodic, next.x, next.lambda);
  } else {
    next.ergodic = ErgodicState::start(next.x, next.lambda);
  }
  if (info) *info = local;
  return next;
}

IterateState admm_step(const Problem& problem, double gamma, const IterateState& state) {
  return AdmmSolver(problem, gamma).step(state);
}

bool Trace::has_warning(WarningKind kind) const {
  return std::any_of(warnings.begin(), warnings.end(), [kind](const auto& w) { return w.kind == kind; });
}

double resolve_gamma(const Problem& problem, const SolverConfig& config) {
  if (const auto* g = std::get_if<ExplicitGamma>(&config.gamma)) return g->value;
  const auto& a = std::get<AutoGamma>(config.gamma);
  const double bound = gamma_bound(problem, a.mode);
  if (!std::isfinite(bound)) {
    throw ValidationError("auto gamma needs a finite bound; with N = 2 any positive gamma is admissible, "
                          "pass an explicit value");
  }
  return a.safety * bound;
}

namespace {

Guarantees active_guarantees(const Problem& problem, double gamma, std::vector<SolverWarning>& warnings,
                             bool explicit_gamma) {
  Guarantees g;
  const std::size_t n = problem.num_blocks();
  if (n == 2) {
    g.ergodic_rate = true;
    return g;
  }
  try {
    const double conv = gamma_bound(problem, GammaMode::Convergence);
    g.ergodic_rate = g.small_o_residual = gamma <= conv;
    if (explicit_gamma && gamma > conv) {
      warnings.push_back({WarningKind::GammaAboveBound,
                          "gamma = " + std::to_string(gamma) + " exceeds the convergence bound " +
                              std::to_string(conv) + "; rate guarantees do not apply"});
    }
    if (n == 3) g.monotone_residual = gamma <= gamma_bound(problem, GammaMode::Monotonicity);
  } catch (const NoGuaranteeError& e) {
    warnings.push_back({WarningKind::NoGammaGuarantee, e.what()});
  }
  return g;
}

}  // namespace

SolveResult solve(const Problem& problem, const SolverConfig& config, std::optional<double> f_star) {
  require_valid(problem);
  check_config(config);
  const double gamma = resolve_gamma(problem, config);

  SolveResult result;
  Trace& trace = result.trace;
  trace.gamma = gamma;
  trace.guarantees =
      active_guarantees(problem, gamma, trace.warnings, std::holds_alternative<ExplicitGamma>(config.gamma));

  const AdmmSolver solver(problem, gamma, config.box_inner_budget);
  IterateState state = solver.initial_state(config.init_x, config.init_lambda);
  std::size_t exhausted_sweeps = 0;
  Solution& sol = result.solution;
  sol.stop_reason = StopReason::MaxIters;

  trace.records.reserve(std::min<std::size_t>(config.max_iters, 1'000'000));
  for (std::size_t it = 0; it < config.max_iters; ++it) {
    SweepInfo info;
    state = solver.step(state, &info, config.verify_subproblems);
    if (info.budget_exhausted) ++exhausted_sweeps;
    if (config.verify_subproblems) trace.subproblem_residuals.push_back(info.max_subproblem_residual);

    IterationRecord rec;
    rec.k = state.k;
    rec.R = residual_R(problem, state.prev_images, state.images);
    rec.objective = objective(problem, state.x);
    rec.feasibility = norm(total_violation(state.images, problem.b).span());
    rec.ergodic_objective = objective(problem, state.ergodic->mean_x);
    rec.ergodic_feasibility = constraint_violation(problem, state.ergodic->mean_x).norm;
    if (f_star) {
      rec.obj_error = std::abs(rec.objective - *f_star);
      rec.ergodic_obj_error = std::abs(rec.ergodic_objective - *f_star);
    }
    trace.records.push_back(rec);
    if (rec.R <= config.tol_R) {
      sol.stop_reason = StopReason::Tolerance;
      break;
    }
  }
  if (exhausted_sweeps > 0) {
    trace.warnings.push_back({WarningKind::BoxBudgetExhausted,
                              "box subproblem budget exhausted above tolerance in " +
                                  std::to_string(exhausted_sweeps) + " sweep(s)"});
  }
  sol.u = state.x;
  sol.lambda = state.lambda;
  sol.iterations = state.k;
  sol.final_R = trace.records.back().R;
  trace.ergodic = state.ergodic;
  return result;
}

std::string to_string(StopReason reason) {
  return reason == StopReason::Tolerance ? "tolerance" : "max_iters";
}

std::string to_string(WarningKind kind) {
  switch (kind) {
    case WarningKind::GammaAboveBound: return "gamma_above_bound";
    case WarningKind::NoGammaGuarantee: return "no_gamma_guarantee";
    case WarningKind::BoxBudgetExhausted: return "box_budget_exhausted";
  }
  return "unknown";
}

}  // namespace mbadmm
