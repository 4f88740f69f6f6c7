#include "mbadmm/harness.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "mbadmm/errors.hpp"

namespace mbadmm {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum class Stream : std::uint64_t { Sigma = 1, B = 2, A = 3, X = 4, Lambda = 5 };

// Uniform draws on [−1, 1) built from raw 64-bit output, so values do not
// depend on the standard library's distribution implementations.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, Stream kind, std::uint64_t block)
      : engine_(splitmix64(seed ^ splitmix64((static_cast<std::uint64_t>(kind) << 32) | block))) {}

  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double symmetric() { return 2.0 * unit() - 1.0; }

 private:
  std::mt19937_64 engine_;
};

Matrix random_matrix(StreamRng& rng, std::size_t rows, std::size_t cols, double scale) {
  std::vector<double> v(rows * cols);
  for (double& e : v) e = scale * rng.symmetric();
  return Matrix(rows, cols, std::move(v));
}

Vector random_vector(StreamRng& rng, std::size_t n, double scale) {
  std::vector<double> v(n);
  for (double& e : v) e = scale * rng.symmetric();
  return Vector(std::move(v));
}

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

void check_generator_spec(const GeneratorSpec& spec) {
  if (spec.num_blocks < 2) throw ValidationError("generator: N must be at least 2");
  if (spec.dims.size() != spec.num_blocks) throw ValidationError("generator: dims must list one entry per block");
  for (std::size_t d : spec.dims)
    if (d == 0) throw ValidationError("generator: block dimensions must be positive");
  if (spec.rows == 0) throw ValidationError("generator: row count p must be positive");
  if (!(spec.sigma_range.first > 0.0) || spec.sigma_range.second < spec.sigma_range.first)
    throw ValidationError("generator: sigma_range must satisfy 0 < lo <= hi");
  if (!(spec.matrix_scale > 0.0) || !(spec.solution_scale > 0.0))
    throw ValidationError("generator: scales must be positive");
}

GeneratedInstance generate_qp(const GeneratorSpec& spec) {
  check_generator_spec(spec);
  GeneratedInstance out;
  Problem& prob = out.problem;
  OracleSolution& oracle = out.oracle;
  const std::size_t p = spec.rows;

  StreamRng lambda_rng(spec.seed, Stream::Lambda, 0);
  oracle.lambda_star = random_vector(lambda_rng, p, spec.solution_scale);

  Vector b(p);
  for (std::size_t i = 0; i < spec.num_blocks; ++i) {
    const std::size_t n = spec.dims[i];
    StreamRng sigma_rng(spec.seed, Stream::Sigma, i);
    StreamRng b_rng(spec.seed, Stream::B, i);
    StreamRng a_rng(spec.seed, Stream::A, i);
    StreamRng x_rng(spec.seed, Stream::X, i);

    const bool singular = i == 0 && spec.singular_first_block;
    const auto [lo, hi] = spec.sigma_range;
    double sigma = lo + (hi - lo) * sigma_rng.unit();
    // A rank-deficient B_1 with at least n − p rows keeps Q_1 + γA_1ᵀA_1
    // generically nonsingular while Q_1 itself is singular.
    const std::size_t b_rows = singular ? (n > p ? n - p : 0) : n;
    if (singular) sigma = 0.0;

    Matrix q_mat(n, n);
    if (b_rows > 0) {
      const Matrix bm = random_matrix(b_rng, b_rows, n, spec.matrix_scale / std::sqrt(static_cast<double>(n)));
      q_mat = gram(bm);
    }
    for (std::size_t j = 0; j < n; ++j) q_mat(j, j) += sigma;

    Matrix a = random_matrix(a_rng, p, n, 1.0 / std::sqrt(static_cast<double>(n)));
    Vector x_star = random_vector(x_rng, n, spec.solution_scale);

    BlockSpec block;
    // q = Aᵀλ* − Q x*, so the block is stationary at x*.
    block.q = multiply_transposed(a, oracle.lambda_star) - multiply(q_mat, x_star);
    block.Q = std::move(q_mat);
    block.constant = 0.0;
    block.set = FullSpace{};
    block.sigma = sigma;

    b = b + multiply(a, x_star);
    prob.blocks.push_back(std::move(block));
    prob.A.push_back(std::move(a));
    oracle.u_star.push_back(std::move(x_star));
  }
  prob.b = std::move(b);
  oracle.f_star = objective(prob, oracle.u_star);
  return out;
}

OracleSolution oracle_solve_eq_qp(const Problem& problem) {
  require_valid(problem);
  std::size_t total = 0;
  for (std::size_t i = 0; i < problem.num_blocks(); ++i) {
    if (problem.blocks[i].is_box())
      throw UnsupportedError("oracle_solve_eq_qp: " + block_name(i) + " has a box set; only free blocks are supported");
    total += problem.blocks[i].dim();
  }
  const std::size_t p = problem.rows();
  const auto dim = static_cast<Eigen::Index>(total + p);
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
  Eigen::Index off = 0;
  const auto pe = static_cast<Eigen::Index>(p);
  for (std::size_t i = 0; i < problem.num_blocks(); ++i) {
    const BlockSpec& block = problem.blocks[i];
    const auto n = static_cast<Eigen::Index>(block.dim());
    const Eigen::Map<const RowMajor> q(block.Q.values().data(), n, n);
    const Eigen::Map<const RowMajor> a(problem.A[i].values().data(), pe, n);
    kkt.block(off, off, n, n) = q;
    kkt.block(off, static_cast<Eigen::Index>(total), n, pe) = -a.transpose();
    kkt.block(static_cast<Eigen::Index>(total), off, pe, n) = a;
    rhs.segment(off, n) = -Eigen::Map<const Eigen::VectorXd>(block.q.values().data(), n);
    off += n;
  }
  rhs.tail(pe) = Eigen::Map<const Eigen::VectorXd>(problem.b.values().data(), pe);

  const Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
  if (!lu.isInvertible()) throw NumericalError("oracle_solve_eq_qp: KKT matrix is singular");
  const Eigen::VectorXd sol = lu.solve(rhs);
  const double rel = (kkt * sol - rhs).norm() / std::max(1.0, rhs.norm());
  if (!(rel <= 1e-9)) throw NumericalError("oracle_solve_eq_qp: KKT solve residual " + std::to_string(rel) + " too large");

  OracleSolution out;
  off = 0;
  for (const auto& block : problem.blocks) {
    const auto n = static_cast<Eigen::Index>(block.dim());
    out.u_star.emplace_back(std::vector<double>(sol.data() + off, sol.data() + off + n));
    off += n;
  }
  out.lambda_star = Vector(std::vector<double>(sol.data() + off, sol.data() + off + pe));
  out.f_star = objective(problem, out.u_star);
  return out;
}

}  // namespace mbadmm
