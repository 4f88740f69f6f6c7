#include "mbadmm/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "mbadmm/errors.hpp"

namespace mbadmm {
namespace {

constexpr std::array<std::pair<TraceField, std::string_view>, 7> kFieldNames{{
    {TraceField::Objective, "objective"},
    {TraceField::Feasibility, "feasibility"},
    {TraceField::R, "R"},
    {TraceField::ErgodicObjective, "ergodic_objective"},
    {TraceField::ErgodicFeasibility, "ergodic_feasibility"},
    {TraceField::ObjError, "obj_error"},
    {TraceField::ErgodicObjError, "ergodic_obj_error"},
}};

void running_mean(Vector& mean, const Vector& value, double inv_count) {
  if (mean.size() != value.size()) throw DimensionError("ergodic_update: size mismatch");
  for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += (value[j] - mean[j]) * inv_count;
}

}  // namespace

ErgodicState ErgodicState::start(const BlockVectors& x, const Vector& lambda) { return {0, x, lambda}; }

void ergodic_update_in_place(ErgodicState& state, const BlockVectors& x, const Vector& lambda) {
  if (x.size() != state.mean_x.size()) throw DimensionError("ergodic_update: block count mismatch");
  const double inv = 1.0 / static_cast<double>(state.t + 2);
  for (std::size_t i = 0; i < x.size(); ++i) running_mean(state.mean_x[i], x[i], inv);
  running_mean(state.mean_lambda, lambda, inv);
  ++state.t;
}

ErgodicState ergodic_update(const ErgodicState& state, const BlockVectors& x, const Vector& lambda) {
  ErgodicState next = state;
  ergodic_update_in_place(next, x, lambda);
  return next;
}

double ergodic_bound_rhs(const Problem& problem, const BlockVectors& x0, const Vector& lambda0,
                         const BlockVectors& x_star, double rho, double gamma, std::size_t t) {
  const std::size_t n = problem.num_blocks();
  if (x0.size() != n || x_star.size() != n) throw DimensionError("ergodic_bound_rhs: block count mismatch");
  // Suffix sums Σ_{m>i} A_m (x_m^0 − x_m^*) for i = N−1 down to 1.
  double sum_sq = 0.0;
  Vector suffix(problem.rows());
  for (std::size_t m = n; m-- > 1;) {
    suffix = suffix + multiply(problem.A[m], x0[m] - x_star[m]);
    sum_sq += norm_sq(suffix.span());
  }
  const double t1 = static_cast<double>(t) + 1.0;
  return gamma / (2.0 * t1) * sum_sq + (rho * rho + norm_sq(lambda0.span())) / (gamma * t1);
}

ErgodicCertificate ergodic_certificate(const Problem& problem, const BlockVectors& x0, const Vector& lambda0,
                                       const BlockVectors& x_star, const Vector& lambda_star, double f_star,
                                       double gamma, const IterationRecord& record) {
  if (record.k == 0) throw OutOfRangeError("ergodic_certificate: record index must be at least 1");
  ErgodicCertificate cert;
  cert.rho = norm(lambda_star.span()) + 1.0;
  cert.t = record.k - 1;
  // C = bound at t = 0 minus ρ²/γ.
  cert.bound_constant = ergodic_bound_rhs(problem, x0, lambda0, x_star, cert.rho, gamma, 0) -
                        cert.rho * cert.rho / gamma;
  cert.bound_value = ergodic_bound_rhs(problem, x0, lambda0, x_star, cert.rho, gamma, cert.t);
  cert.measured_value = record.ergodic_objective - f_star + cert.rho * record.ergodic_feasibility;
  cert.satisfied = cert.measured_value <= cert.bound_value + 1e-9;
  cert.lower_satisfied = cert.measured_value >= -1e-9;
  return cert;
}

std::optional<TraceField> parse_trace_field(std::string_view name) {
  for (const auto& [field, n] : kFieldNames)
    if (n == name) return field;
  return std::nullopt;
}

std::string_view field_name(TraceField field) {
  for (const auto& [f, n] : kFieldNames)
    if (f == field) return n;
  return "?";
}

std::optional<double> field_value(const IterationRecord& record, TraceField field) {
  switch (field) {
    case TraceField::Objective: return record.objective;
    case TraceField::Feasibility: return record.feasibility;
    case TraceField::R: return record.R;
    case TraceField::ErgodicObjective: return record.ergodic_objective;
    case TraceField::ErgodicFeasibility: return record.ergodic_feasibility;
    case TraceField::ObjError: return record.obj_error;
    case TraceField::ErgodicObjError: return record.ergodic_obj_error;
  }
  return std::nullopt;
}

RateFit rate_fit(const std::vector<IterationRecord>& records, TraceField field,
                 std::pair<std::size_t, std::size_t> window) {
  const auto [lo, hi] = window;
  if (lo == 0 || hi < lo || hi - lo + 1 < 10) {
    throw InsufficientDataError("rate_fit: window [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                    "] must start at k >= 1 and span at least 10 iterations",
                                0);
  }
  std::vector<double> xs;
  std::vector<double> ys;
  std::size_t excluded = 0;
  for (const auto& rec : records) {
    if (rec.k < lo || rec.k > hi) continue;
    const auto v = field_value(rec, field);
    if (!v || !(*v > 0.0) || !std::isfinite(*v)) {
      ++excluded;
      continue;
    }
    xs.push_back(std::log(static_cast<double>(rec.k)));
    ys.push_back(std::log(*v));
  }
  if (xs.size() < 10) {
    throw InsufficientDataError("rate_fit: only " + std::to_string(xs.size()) + " positive samples of " +
                                    std::string(field_name(field)) + " in the window",
                                xs.size());
  }
  const auto m = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    mx += xs[j];
    my += ys[j];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const double dx = xs[j] - mx;
    const double dy = ys[j] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  RateFit fit;
  fit.window = window;
  fit.samples = xs.size();
  fit.excluded = excluded;
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const double e = ys[j] - (fit.intercept + fit.slope * xs[j]);
    ss_res += e * e;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return fit;
}

std::pair<std::size_t, std::size_t> default_rate_window(std::size_t k_max) {
  return {std::max<std::size_t>(1, k_max / 10), k_max};
}

std::vector<MonotonicityViolation> monotonicity_audit(const std::vector<IterationRecord>& records) {
  std::vector<MonotonicityViolation> out;
  for (std::size_t j = 0; j + 1 < records.size(); ++j) {
    const double rk = records[j].R;
    const double rn = records[j + 1].R;
    if (records[j].k >= 1 && rn > rk * (1.0 + 1e-12) + 1e-15) out.push_back({records[j].k, rk, rn});
  }
  return out;
}

std::vector<std::pair<std::size_t, double>> small_o_certificate(const std::vector<IterationRecord>& records,
                                                                const std::vector<std::size_t>& checkpoints) {
  std::vector<std::pair<std::size_t, double>> out;
  out.reserve(checkpoints.size());
  for (std::size_t k : checkpoints) {
    const auto it = std::find_if(records.begin(), records.end(), [k](const auto& r) { return r.k == k; });
    if (it == records.end()) {
      throw OutOfRangeError("small_o_certificate: checkpoint k = " + std::to_string(k) +
                            " is outside the recorded range");
    }
    out.emplace_back(k, static_cast<double>(k) * it->R);
  }
  return out;
}

}  // namespace mbadmm
