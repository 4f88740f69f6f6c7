#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "mbadmm/errors.hpp"
#include "mbadmm/harness.hpp"
#include "mbadmm/io.hpp"
#include "support.hpp"

using namespace mbadmm;

namespace {

GeneratorSpec spec_for(std::uint64_t seed, std::vector<std::size_t> dims, std::size_t rows) {
  GeneratorSpec s;
  s.seed = seed;
  s.num_blocks = dims.size();
  s.dims = std::move(dims);
  s.rows = rows;
  return s;
}

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "mbadmm_test_harness";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("generated instances are valid with a KKT oracle") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto spec = spec_for(seed, {3 + seed % 5, 4, 2 + seed % 7}, 1 + seed % 4);
    spec.singular_first_block = seed % 2 == 0;
    const auto inst = generate_qp(spec);
    CHECK(validate(inst.problem).empty());
    const auto kkt = kkt_residual(inst.problem, inst.oracle.u_star, inst.oracle.lambda_star);
    CHECK(kkt.max_component() <= 1e-10);
    CHECK(inst.oracle.f_star == objective(inst.problem, inst.oracle.u_star));
    if (spec.singular_first_block) CHECK(inst.problem.blocks[0].sigma == 0.0);
  }
}

TEST_CASE("generator is deterministic in the seed") {
  const auto a = generate_qp(spec_for(99, {5, 6, 7}, 4));
  const auto b = generate_qp(spec_for(99, {5, 6, 7}, 4));
  CHECK(a.problem == b.problem);
  CHECK(a.oracle.u_star == b.oracle.u_star);
  CHECK_FALSE(a.problem == generate_qp(spec_for(100, {5, 6, 7}, 4)).problem);
}

TEST_CASE("seed 42 regression fixture") {
  const auto inst = generate_qp(spec_for(42, {20, 20, 20}, 10));
  CHECK(validate(inst.problem).empty());
  const double g = gamma_bound(inst.problem, GammaMode::Convergence);
  CHECK(std::isfinite(g));
  CHECK(g > 0.0);
  CHECK(format_g17(g) == "0.89397939100153623");
  // Independent dense eigensolver with the declared σ_2, σ_3.
  CHECK(g == doctest::Approx(0.8939793910000546).epsilon(1e-9));
}

TEST_CASE("check_generator_spec") {
  CHECK_THROWS_AS(generate_qp(spec_for(1, {3}, 2)), ValidationError);
  auto s = spec_for(1, {3, 3}, 2);
  s.dims = {3};
  CHECK_THROWS_AS(generate_qp(s), ValidationError);
  s = spec_for(1, {3, 3}, 2);
  s.sigma_range = {0.0, 1.0};
  CHECK_THROWS_AS(generate_qp(s), ValidationError);
}

TEST_CASE("oracle_solve_eq_qp") {
  auto o = oracle_solve_eq_qp(testing::three_scalar());
  for (const auto& x : o.u_star) CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(o.lambda_star[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(o.f_star == doctest::Approx(1.5).epsilon(1e-14));

  o = oracle_solve_eq_qp(testing::two_scalar());
  for (const auto& x : o.u_star) CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(o.lambda_star[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(o.f_star == doctest::Approx(1.0).epsilon(1e-14));

  Problem boxed = testing::three_scalar();
  boxed.blocks[0].set = Box{Vector{0}, Vector{1}};
  CHECK_THROWS_AS(oracle_solve_eq_qp(boxed), UnsupportedError);

  Problem singular = testing::two_scalar();
  for (auto& b : singular.blocks) b.Q = Matrix{{0}};
  CHECK_THROWS_AS(oracle_solve_eq_qp(singular), NumericalError);
}

TEST_CASE("KKT oracle agrees with the planted solution") {
  for (std::uint64_t seed : {42ULL, 1ULL, 2ULL, 3ULL, 4ULL}) {
    const auto inst = generate_qp(spec_for(seed, {20, 20, 20}, 10));
    const auto o = oracle_solve_eq_qp(inst.problem);
    for (std::size_t i = 0; i < o.u_star.size(); ++i)
      for (std::size_t j = 0; j < o.u_star[i].size(); ++j)
        CHECK(std::abs(o.u_star[i][j] - inst.oracle.u_star[i][j]) <= 1e-8);
    for (std::size_t j = 0; j < o.lambda_star.size(); ++j)
      CHECK(std::abs(o.lambda_star[j] - inst.oracle.lambda_star[j]) <= 1e-8);
    CHECK(kkt_residual(inst.problem, o.u_star, o.lambda_star).max_component() <= 1e-8);
  }
}

TEST_CASE("problem files round-trip bit-identically") {
  const auto dir = temp_dir();
  auto spec = spec_for(5, {4, 3, 6}, 3);
  spec.singular_first_block = true;
  Problem p = generate_qp(spec).problem;
  p.blocks[1].set = Box{Vector{-1, -2, -3}, Vector{1, 0.1, 1e-300}};
  p.blocks[2].constant = 0.1;
  write_problem_file(p, dir / "p.json");
  CHECK(read_problem_file(dir / "p.json") == p);
}

TEST_CASE("problem parsing is strict") {
  const Json good = problem_to_json(testing::three_scalar());
  CHECK(problem_from_json(good) == testing::three_scalar());
  Json extra = good;
  extra["extra"] = 1;
  CHECK_THROWS_AS(problem_from_json(extra), ValidationError);
  Json missing = good;
  missing["blocks"][0].erase("q");
  CHECK_THROWS_AS(problem_from_json(missing), ValidationError);
  Json wrong_set = good;
  wrong_set["blocks"][0]["set"] = {{"type", "ball"}};
  CHECK_THROWS_AS(problem_from_json(wrong_set), ValidationError);
  Json bad_dim = good;
  bad_dim["blocks"][0]["dim"] = 2;
  CHECK_THROWS_AS(problem_from_json(bad_dim), ValidationError);
}

TEST_CASE("trace CSV round-trips") {
  std::vector<IterationRecord> recs;
  for (std::size_t k = 1; k <= 5; ++k) {
    IterationRecord r;
    r.k = k;
    r.objective = 1.0 / 3.0 * static_cast<double>(k);
    r.feasibility = std::pow(0.1, static_cast<double>(k));
    r.R = 1e-300 * static_cast<double>(k);
    r.ergodic_objective = -0.7;
    r.ergodic_feasibility = 0.0;
    if (k % 2 == 0) r.obj_error = 2.0 / 7.0;
    if (k > 3) r.ergodic_obj_error = 1e-17;
    recs.push_back(r);
  }
  std::stringstream ss;
  write_trace_csv(recs, ss);
  const std::string text = ss.str();
  CHECK(text.rfind("k,objective,feasibility,R,ergodic_objective,ergodic_feasibility,obj_error,ergodic_obj_error\n", 0) == 0);
  CHECK(read_trace_csv(ss) == recs);
}

TEST_CASE("number formatting") {
  CHECK(format_short(0.5) == "0.5");
  CHECK(format_short(1.0) == "1.0");
  CHECK(format_short(0.2) == "0.2");
  CHECK(format_short(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(json_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_g17(0.1) == "0.10000000000000001");
}
