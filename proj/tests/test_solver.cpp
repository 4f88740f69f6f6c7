#include <doctest.h>

#include <cmath>

#include "mbadmm/errors.hpp"
#include "mbadmm/harness.hpp"
#include "mbadmm/solver.hpp"
#include "support.hpp"

using namespace mbadmm;
using testing::scalars;
using testing::three_scalar;
using testing::two_scalar;

namespace {

IterateState state_at(const Problem& p, const BlockVectors& x, const Vector& lambda) {
  return AdmmSolver(p, 1.0).initial_state(x, lambda);
}

GeneratedInstance instance(std::uint64_t seed, std::vector<std::size_t> dims = {6, 7, 8}, std::size_t rows = 5) {
  GeneratorSpec spec;
  spec.seed = seed;
  spec.num_blocks = dims.size();
  spec.dims = std::move(dims);
  spec.rows = rows;
  return generate_qp(spec);
}

}  // namespace

TEST_CASE("block_subproblem_solve") {
  const Problem p = three_scalar();
  // partial = x_2 + x_3 − b with the others at zero.
  auto r = block_subproblem_solve(p, 0, 1.0, Vector{-3}, Vector{0});
  CHECK(r.x == Vector{1.5});
  CHECK(r.residual <= 1e-12);

  Problem decoupled;
  BlockSpec b;
  b.Q = Matrix::identity(2);
  b.q = Vector{-2, 0};
  decoupled.blocks = {b, b};
  decoupled.A = {Matrix(1, 2, 0.0), Matrix(1, 2, 0.0)};
  decoupled.b = Vector{0};
  r = block_subproblem_solve(decoupled, 0, 1.0, Vector{5}, Vector{3});
  CHECK(r.x == Vector{2, 0});

  Problem boxed = three_scalar();
  boxed.blocks[0].set = Box{Vector{0}, Vector{1}};
  r = block_subproblem_solve(boxed, 0, 1.0, Vector{-3}, Vector{0});
  CHECK(r.x == Vector{1.0});
  CHECK_FALSE(r.budget_exhausted);
}

TEST_CASE("box subproblem with coupled Hessian meets the projected-gradient tolerance") {
  Problem p;
  BlockSpec b;
  b.Q = Matrix{{2, 1}, {1, 2}};
  b.q = Vector{-10, 4};
  b.set = Box{Vector{-1, -1}, Vector{1, 1}};
  p.blocks = {b, testing::scalar_block()};
  p.A = {Matrix{{1, 1}}, Matrix{{1}}};
  p.b = Vector{0.5};
  const auto r = block_subproblem_solve(p, 0, 1.0, Vector{-0.5}, Vector{0.2});
  CHECK_FALSE(r.budget_exhausted);
  CHECK(r.residual <= 1e-7);
  CHECK(subproblem_residual(p, 0, 1.0, Vector{-0.5}, Vector{0.2}, r.x) <= 1e-7);
  for (double v : r.x) CHECK((v >= -1.0 && v <= 1.0));
}

TEST_CASE("dual_update") {
  CHECK(dual_update(Vector{0}, 1.0, Vector{-0.375}) == Vector{0.375});
  CHECK(dual_update(Vector{0, 0}, 2.0, Vector{1, -1}) == Vector{-2, 2});
  CHECK(dual_update(Vector{0.3, -7}, 3.0, Vector{0, 0}) == Vector{0.3, -7});
}

TEST_CASE("admm_step one-sweep examples") {
  const Problem p3 = three_scalar();
  auto s = admm_step(p3, 1.0, state_at(p3, scalars({0, 0, 0}), Vector{0}));
  CHECK(s.k == 1);
  CHECK(s.x == scalars({1.5, 0.75, 0.375}));
  CHECK(s.lambda == Vector{0.375});

  s = admm_step(p3, 1.0, state_at(p3, scalars({1, 1, 1}), Vector{1}));
  CHECK(s.x == scalars({1, 1, 1}));
  CHECK(s.lambda == Vector{1});

  const Problem p2 = two_scalar();
  s = admm_step(p2, 1.0, state_at(p2, scalars({0, 0}), Vector{0}));
  CHECK(s.x == scalars({1, 0.5}));
  CHECK(s.lambda == Vector{0.5});
}

TEST_CASE("residual_R") {
  const Problem p = three_scalar();
  // Σ images − b = 0.5; Δ on blocks 2 and 3 is 0.1 and 0.2.
  const double r = residual_R(p, scalars({1.2, 1.0, 1.0}), scalars({1.2, 1.1, 1.2}));
  CHECK(r == doctest::Approx(0.39).epsilon(1e-12));
  CHECK(residual_R(p, scalars({1, 1, 1}), scalars({1, 1, 1})) == 0.0);

  const Problem p4 = testing::scalar_problem(4, 0.0);
  CHECK(residual_R(p4, scalars({0, 0, 0, 0}), scalars({0, 1, 0, 0})) == 1.0 + 3.0);
  CHECK(residual_R(p4, scalars({0, 0, 0, 0}), scalars({0, 0, 1, 0})) == 1.0 + 5.0);
  CHECK(residual_R(p4, scalars({0, 0, 0, 0}), scalars({0, 0, 0, 1})) == 1.0 + 6.0);
  const Problem p2 = testing::scalar_problem(2, 0.0);
  CHECK(residual_R(p2, scalars({0, 0}), scalars({0, 1})) == 2.0);
}

TEST_CASE("solve: 3-scalar problem converges to the symmetric optimum") {
  SolverConfig cfg;
  cfg.gamma = ExplicitGamma{0.5};
  cfg.max_iters = 2000;
  cfg.tol_R = 1e-16;
  const auto res = solve(three_scalar(), cfg);
  for (const auto& x : res.solution.u) CHECK(std::abs(x[0] - 1.0) <= 1e-6);
  CHECK(std::abs(res.solution.lambda[0] - 1.0) <= 1e-6);
  CHECK(res.solution.stop_reason == StopReason::Tolerance);
  CHECK(res.trace.records.size() == res.solution.iterations);
  CHECK(res.trace.warnings.empty());
}

TEST_CASE("solve: start at the KKT point stops after one sweep") {
  SolverConfig cfg;
  cfg.gamma = ExplicitGamma{0.5};
  cfg.init_x = scalars({1, 1, 1});
  cfg.init_lambda = Vector{1};
  const auto res = solve(three_scalar(), cfg);
  CHECK(res.solution.iterations == 1);
  CHECK(res.solution.stop_reason == StopReason::Tolerance);
  CHECK(res.solution.final_R <= 1e-20);
}

TEST_CASE("solve: N=2 with singular Q_1 runs without a gamma warning") {
  Problem p = two_scalar();
  p.blocks[0].Q = Matrix{{0}};
  SolverConfig cfg;
  cfg.gamma = ExplicitGamma{1.0};
  const auto res = solve(p, cfg);
  CHECK(res.trace.warnings.empty());
  CHECK(res.trace.guarantees.ergodic_rate);
  CHECK_FALSE(res.trace.guarantees.monotone_residual);
  CHECK_FALSE(res.trace.guarantees.small_o_residual);
}

TEST_CASE("solve: gamma handling") {
  SolverConfig cfg;
  cfg.gamma = ExplicitGamma{5.0};
  cfg.max_iters = 5;
  auto res = solve(three_scalar(), cfg);
  CHECK(res.trace.has_warning(WarningKind::GammaAboveBound));
  CHECK_FALSE(res.trace.guarantees.ergodic_rate);

  cfg.gamma = AutoGamma{GammaMode::Monotonicity, 0.5};
  res = solve(three_scalar(), cfg);
  CHECK(res.trace.gamma == 0.5);
  CHECK(res.trace.guarantees.monotone_residual);

  Problem flat = three_scalar();
  flat.blocks[2].Q = Matrix{{0}};
  cfg.gamma = AutoGamma{};
  CHECK_THROWS_AS(solve(flat, cfg), NoGuaranteeError);
  cfg.gamma = ExplicitGamma{0.1};
  res = solve(flat, cfg);
  CHECK(res.trace.has_warning(WarningKind::NoGammaGuarantee));

  cfg.gamma = ExplicitGamma{-1.0};
  CHECK_THROWS_AS(solve(three_scalar(), cfg), ValidationError);
  cfg.gamma = AutoGamma{GammaMode::Convergence, 1.5};
  CHECK_THROWS_AS(solve(three_scalar(), cfg), ValidationError);
  cfg.gamma = ExplicitGamma{1.0};
  cfg.max_iters = 0;
  CHECK_THROWS_AS(solve(three_scalar(), cfg), ValidationError);
}

TEST_CASE("fixed point: one step from the oracle KKT pair moves nothing") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto inst = instance(seed);
    const double gamma = 0.99 * gamma_bound(inst.problem, GammaMode::Convergence);
    const AdmmSolver solver(inst.problem, gamma);
    const auto s0 = solver.initial_state(inst.oracle.u_star, inst.oracle.lambda_star);
    const auto s1 = solver.step(s0);
    for (std::size_t i = 0; i < s0.x.size(); ++i)
      for (std::size_t j = 0; j < s0.x[i].size(); ++j) CHECK(std::abs(s1.x[i][j] - s0.x[i][j]) <= 1e-10);
    for (std::size_t j = 0; j < s0.lambda.size(); ++j) CHECK(std::abs(s1.lambda[j] - s0.lambda[j]) <= 1e-10);
  }
}

TEST_CASE("dual update identity holds bitwise along a run") {
  const auto inst = instance(21);
  const double gamma = 0.99 * gamma_bound(inst.problem, GammaMode::Convergence);
  const AdmmSolver solver(inst.problem, gamma);
  auto state = solver.initial_state();
  for (int k = 0; k < 50; ++k) {
    const auto next = solver.step(state);
    const auto viol = constraint_violation(inst.problem, next.x).vector;
    CHECK(next.lambda == dual_update(state.lambda, gamma, viol));
    state = next;
  }
}

TEST_CASE("Gauss-Seidel order: each block is optimal for its exact arguments") {
  const auto inst = instance(4);
  const Problem& p = inst.problem;
  const double gamma = 0.99 * gamma_bound(p, GammaMode::Convergence);
  const AdmmSolver solver(p, gamma);
  auto state = solver.initial_state();
  for (int k = 0; k < 20; ++k) {
    const auto next = solver.step(state);
    for (std::size_t i = 0; i < p.num_blocks(); ++i) {
      // Freshest values for earlier blocks, previous values for later ones.
      Vector partial = -1.0 * p.b;
      for (std::size_t j = 0; j < p.num_blocks(); ++j) {
        if (j == i) continue;
        partial = partial + multiply(p.A[j], j < i ? next.x[j] : state.x[j]);
      }
      // Gradient of f_i − λᵀA_i x + (γ/2)‖A_i x + partial‖² at the returned x_i.
      Vector g = multiply(p.blocks[i].Q, next.x[i]) + p.blocks[i].q -
                 multiply_transposed(p.A[i], state.lambda) +
                 gamma * multiply_transposed(p.A[i], multiply(p.A[i], next.x[i]) + partial);
      CHECK(norm(g.span()) <= 1e-9 * (1.0 + norm(p.blocks[i].q.span())));
    }
    state = next;
  }

  SolverConfig cfg;
  cfg.max_iters = 30;
  cfg.tol_R = 0.0;
  cfg.verify_subproblems = true;
  const auto res = solve(p, cfg);
  REQUIRE(res.trace.subproblem_residuals.size() == 30);
  double max_q = 0.0;
  for (const auto& b : p.blocks) max_q = std::max(max_q, norm(b.q.span()));
  for (double r : res.trace.subproblem_residuals) CHECK(r <= 1e-9 * (1.0 + max_q));
}

TEST_CASE("R near zero implies a KKT point") {
  const auto inst = instance(8);
  SolverConfig cfg;
  cfg.max_iters = 20000;
  cfg.tol_R = 1e-18;
  const auto res = solve(inst.problem, cfg);
  REQUIRE(res.solution.final_R <= 1e-18);
  const auto kkt = kkt_residual(inst.problem, res.solution.u, res.solution.lambda);
  CHECK(kkt.max_component() <= 1e-8);
}

TEST_CASE("monotone residual under the monotonicity bound") {
  for (std::uint64_t seed = 30; seed < 35; ++seed) {
    const auto inst = instance(seed);
    SolverConfig cfg;
    cfg.gamma = AutoGamma{GammaMode::Monotonicity};
    cfg.max_iters = 2000;
    cfg.tol_R = 0.0;
    const auto res = solve(inst.problem, cfg);
    const auto& rec = res.trace.records;
    for (std::size_t k = 1; k < rec.size(); ++k) CHECK(rec[k].R <= rec[k - 1].R + 1e-12 * (1.0 + rec[k - 1].R));
  }
}

TEST_CASE("box-constrained blocks converge to a KKT point") {
  Problem p = three_scalar();
  p.blocks[0].set = Box{Vector{0}, Vector{0.5}};
  p.blocks[1].Q = Matrix{{1}};
  SolverConfig cfg;
  cfg.gamma = ExplicitGamma{0.4};
  cfg.max_iters = 20000;
  cfg.tol_R = 1e-24;
  const auto res = solve(p, cfg);
  CHECK(res.solution.u[0][0] == doctest::Approx(0.5));
  CHECK(kkt_residual(p, res.solution.u, res.solution.lambda).max_component() <= 1e-8);
}

TEST_CASE("solve is deterministic") {
  const auto inst = instance(17);
  SolverConfig cfg;
  cfg.max_iters = 300;
  cfg.tol_R = 0.0;
  const auto a = solve(inst.problem, cfg, inst.oracle.f_star);
  const auto b = solve(inst.problem, cfg, inst.oracle.f_star);
  REQUIRE(a.trace.records.size() == b.trace.records.size());
  for (std::size_t k = 0; k < a.trace.records.size(); ++k) {
    const auto& ra = a.trace.records[k];
    const auto& rb = b.trace.records[k];
    CHECK(ra.R == rb.R);
    CHECK(ra.objective == rb.objective);
    CHECK(ra.ergodic_feasibility == rb.ergodic_feasibility);
    CHECK(ra.ergodic_obj_error == rb.ergodic_obj_error);
  }
  CHECK(a.solution.u == b.solution.u);
  CHECK(a.solution.lambda == b.solution.lambda);
}
