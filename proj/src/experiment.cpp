#include "mbadmm/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "mbadmm/errors.hpp"

namespace mbadmm {
namespace {

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
  if (p.is_absolute() || base.empty()) return p;
  return base / p;
}

std::pair<std::size_t, std::size_t> parse_window(const Json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer())
    throw ValidationError(where + ": expected [k_lo, k_hi]");
  const auto lo = v[0].get<long long>();
  const auto hi = v[1].get<long long>();
  if (lo < 1 || hi < lo) throw ValidationError(where + ": need 1 <= k_lo <= k_hi");
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

GammaMode parse_mode(const std::string& s) {
  if (s == "convergence" || s == "conv") return GammaMode::Convergence;
  if (s == "monotonicity" || s == "mono") return GammaMode::Monotonicity;
  throw ValidationError("unknown gamma mode \"" + s + "\" (use convergence or monotonicity)");
}

std::string mode_name(GammaMode m) { return m == GammaMode::Convergence ? "convergence" : "monotonicity"; }

struct LoadedProblem {
  Problem problem;
  std::optional<OracleSolution> oracle;
  Json source;
};

LoadedProblem load_problem(const ExperimentConfig& config) {
  LoadedProblem out;
  if (const auto* gen = std::get_if<GeneratorSpec>(&config.problem)) {
    GeneratedInstance inst = generate_qp(*gen);
    out.problem = std::move(inst.problem);
    out.oracle = std::move(inst.oracle);
    out.source = {{"kind", "generator"}, {"seed", gen->seed}, {"rng", kRngAlgorithm}};
  } else {
    const auto& file = std::get<ProblemFromFile>(config.problem);
    out.problem = read_problem_file(file.path);
    out.source = {{"kind", "file"}, {"path", file.path.generic_string()}};
  }
  require_valid(out.problem);
  check_config(config.solver);
  if (!out.oracle) {
    const bool all_free = std::none_of(out.problem.blocks.begin(), out.problem.blocks.end(),
                                       [](const BlockSpec& b) { return b.is_box(); });
    if (all_free) {
      try {
        out.oracle = oracle_solve_eq_qp(out.problem);
      } catch (const Error&) {
        // Singular KKT system: run without an oracle.
      }
    }
  }
  return out;
}

std::vector<std::size_t> default_checkpoints(std::size_t k_max) {
  std::vector<std::size_t> out;
  for (std::size_t div : {20, 10, 5, 2, 1}) {
    const std::size_t k = k_max / div;
    if (k >= 1 && (out.empty() || out.back() != k)) out.push_back(k);
  }
  return out;
}

Json fit_json(const std::vector<IterationRecord>& records, TraceField field,
              std::pair<std::size_t, std::size_t> window) {
  try {
    const RateFit fit = rate_fit(records, field, window);
    return {{"status", "ok"},
            {"slope", fit.slope},
            {"intercept", fit.intercept},
            {"r_squared", fit.r_squared},
            {"window", {fit.window.first, fit.window.second}},
            {"samples", fit.samples},
            {"excluded", fit.excluded}};
  } catch (const InsufficientDataError& e) {
    return {{"status", "insufficient-data"}, {"reason", e.what()}};
  }
}

Json build_report(const LoadedProblem& loaded, const ExperimentConfig& config, const SolveResult& result) {
  const Problem& problem = loaded.problem;
  const auto& records = result.trace.records;
  const Solution& sol = result.solution;
  Json report;
  report["problem"] = loaded.source;
  std::vector<std::size_t> dims;
  for (const auto& b : problem.blocks) dims.push_back(b.dim());
  report["problem"]["N"] = problem.num_blocks();
  report["problem"]["dims"] = dims;
  report["problem"]["p"] = problem.rows();

  report["gamma"] = result.trace.gamma;
  if (const auto* a = std::get_if<AutoGamma>(&config.solver.gamma)) {
    report["gamma_source"] = {{"kind", "auto"}, {"mode", mode_name(a->mode)}, {"safety", a->safety}};
  } else {
    report["gamma_source"] = {{"kind", "explicit"}};
  }
  Json bounds = Json::object();
  for (GammaMode mode : {GammaMode::Convergence, GammaMode::Monotonicity}) {
    if (mode == GammaMode::Monotonicity && problem.num_blocks() != 3) {
      bounds[mode_name(mode)] = nullptr;
      continue;
    }
    try {
      bounds[mode_name(mode)] = json_number(gamma_bound(problem, mode));
    } catch (const Error& e) {
      bounds[mode_name(mode)] = {{"error", e.what()}};
    }
  }
  report["gamma_bounds"] = bounds;
  const Guarantees& g = result.trace.guarantees;
  report["guarantees"] = {{"ergodic_rate", g.ergodic_rate},
                          {"monotone_residual", g.monotone_residual},
                          {"small_o_residual", g.small_o_residual}};
  Json warnings = Json::array();
  for (const auto& w : result.trace.warnings) warnings.push_back({{"kind", to_string(w.kind)}, {"message", w.message}});
  report["warnings"] = warnings;
  report["gamma_warning"] = result.trace.has_warning(WarningKind::GammaAboveBound);

  report["iterations"] = sol.iterations;
  report["stop_reason"] = to_string(sol.stop_reason);
  report["final_R"] = sol.final_R;
  report["final_objective"] = records.back().objective;
  report["final_feasibility"] = records.back().feasibility;

  const auto window = config.rate_window.value_or(default_rate_window(sol.iterations));
  report["rate_window"] = {window.first, window.second};
  Json fits = Json::object();
  for (TraceField f : {TraceField::ObjError, TraceField::ErgodicObjError, TraceField::ErgodicFeasibility, TraceField::R})
    fits[std::string(field_name(f))] = fit_json(records, f, window);
  report["rate_fits"] = fits;

  Json violations = Json::array();
  for (const auto& v : monotonicity_audit(records)) violations.push_back({{"k", v.k}, {"R_k", v.R_k}, {"R_next", v.R_next}});
  report["monotonicity_violations"] = violations;

  std::vector<std::size_t> checkpoints = config.small_o_checkpoints.value_or(default_checkpoints(sol.iterations));
  std::erase_if(checkpoints, [&](std::size_t k) { return k < 1 || k > sol.iterations; });
  Json small_o = Json::array();
  for (const auto& [k, v] : small_o_certificate(records, checkpoints)) small_o.push_back({{"k", k}, {"k_R_k", v}});
  report["small_o"] = small_o;

  if (loaded.oracle) {
    const OracleSolution& o = *loaded.oracle;
    double dist_sq = 0.0;
    for (std::size_t i = 0; i < sol.u.size(); ++i) dist_sq += norm_sq((sol.u[i] - o.u_star[i]).span());
    const KktResidual kkt = kkt_residual(problem, sol.u, sol.lambda);
    report["oracle"] = {{"f_star", o.f_star},
                        {"distance_to_u_star", std::sqrt(dist_sq)},
                        {"dual_distance", norm((sol.lambda - o.lambda_star).span())},
                        {"kkt_residual_max", kkt.max_component()}};

    const AdmmSolver probe(problem, result.trace.gamma, config.solver.box_inner_budget);
    const IterateState init = probe.initial_state(config.solver.init_x, config.solver.init_lambda);
    std::size_t upper_bad = 0;
    std::size_t lower_bad = 0;
    ErgodicCertificate last;
    for (const auto& rec : records) {
      last = ergodic_certificate(problem, init.x, init.lambda, o.u_star, o.lambda_star, o.f_star, result.trace.gamma,
                                 rec);
      if (!last.satisfied) ++upper_bad;
      if (!last.lower_satisfied) ++lower_bad;
    }
    report["certificate"] = {{"rho", last.rho},
                             {"bound_constant", last.bound_constant},
                             {"checked", records.size()},
                             {"upper_violations", upper_bad},
                             {"lower_violations", lower_bad},
                             {"all_satisfied", upper_bad == 0 && lower_bad == 0},
                             {"guaranteed", g.ergodic_rate},
                             {"last", {{"t", last.t}, {"bound_value", last.bound_value}, {"measured_value", last.measured_value}}}};
  } else {
    report["oracle"] = nullptr;
    report["certificate"] = nullptr;
  }
  return report;
}

}  // namespace

SolverConfig solver_config_from_json(const Json& doc) {
  const std::string where = "solver";
  if (!doc.is_object()) throw ValidationError(where + ": expected an object");
  SolverConfig cfg;
  for (const auto& [key, v] : doc.items()) {
    if (key == "gamma") {
      if (v.is_number()) {
        cfg.gamma = ExplicitGamma{v.get<double>()};
      } else if (v.is_object() && v.contains("explicit")) {
        if (v.size() != 1 || !v["explicit"].is_number()) throw ValidationError(where + ": bad explicit gamma");
        cfg.gamma = ExplicitGamma{v["explicit"].get<double>()};
      } else if (v.is_object() && v.contains("auto")) {
        AutoGamma a;
        for (const auto& [k2, v2] : v.items()) {
          if (k2 == "auto" && v2.is_string()) {
            a.mode = parse_mode(v2.get<std::string>());
          } else if (k2 == "safety" && v2.is_number()) {
            a.safety = v2.get<double>();
          } else {
            throw ValidationError(where + ": bad auto gamma field \"" + k2 + "\"");
          }
        }
        cfg.gamma = a;
      } else {
        throw ValidationError(where + ": gamma must be a number, {\"explicit\": x} or {\"auto\": mode}");
      }
    } else if (key == "max_iters") {
      if (!v.is_number_integer() || v.get<long long>() < 1) throw ValidationError(where + ": max_iters must be >= 1");
      cfg.max_iters = v.get<std::size_t>();
    } else if (key == "tol_R") {
      if (!v.is_number()) throw ValidationError(where + ": tol_R must be a number");
      cfg.tol_R = v.get<double>();
    } else if (key == "box_inner_budget") {
      if (!v.is_number_integer() || v.get<long long>() < 0) throw ValidationError(where + ": bad box_inner_budget");
      cfg.box_inner_budget = v.get<std::size_t>();
    } else if (key == "init_x") {
      if (v.is_string() && v.get<std::string>() == "zeros") continue;
      if (!v.is_array()) throw ValidationError(where + ": init_x must be \"zeros\" or a list of vectors");
      BlockVectors x;
      for (const auto& xi : v) {
        if (!xi.is_array()) throw ValidationError(where + ": init_x entries must be arrays");
        std::vector<double> vals;
        for (const auto& e : xi) {
          if (!e.is_number()) throw ValidationError(where + ": init_x entries must be numbers");
          vals.push_back(e.get<double>());
        }
        x.emplace_back(std::move(vals));
      }
      cfg.init_x = std::move(x);
    } else if (key == "init_lambda") {
      if (v.is_string() && v.get<std::string>() == "zeros") continue;
      if (!v.is_array()) throw ValidationError(where + ": init_lambda must be \"zeros\" or a vector");
      std::vector<double> vals;
      for (const auto& e : v) {
        if (!e.is_number()) throw ValidationError(where + ": init_lambda entries must be numbers");
        vals.push_back(e.get<double>());
      }
      cfg.init_lambda = Vector(std::move(vals));
    } else if (key == "verify_subproblems") {
      if (!v.is_boolean()) throw ValidationError(where + ": verify_subproblems must be a boolean");
      cfg.verify_subproblems = v.get<bool>();
    } else {
      throw ValidationError(where + ": unknown field \"" + key + "\"");
    }
  }
  check_config(cfg);
  return cfg;
}

ExperimentConfig experiment_from_json(const Json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ValidationError("experiment: expected a JSON object");
  ExperimentConfig cfg;
  bool have_problem = false;
  bool have_trace = false;
  bool have_report = false;
  for (const auto& [key, v] : doc.items()) {
    if (key == "problem") {
      if (!v.is_object() || v.size() != 1) throw ValidationError("experiment: problem must be {\"file\": ...} or {\"generator\": ...}");
      if (v.contains("file")) {
        if (!v["file"].is_string()) throw ValidationError("experiment: problem file must be a path string");
        cfg.problem = ProblemFromFile{resolve(v["file"].get<std::string>(), base_dir)};
      } else if (v.contains("generator")) {
        cfg.problem = generator_spec_from_json(v["generator"]);
      } else {
        throw ValidationError("experiment: problem must be {\"file\": ...} or {\"generator\": ...}");
      }
      have_problem = true;
    } else if (key == "solver") {
      cfg.solver = solver_config_from_json(v);
    } else if (key == "trace") {
      if (!v.is_string()) throw ValidationError("experiment: trace must be a path string");
      cfg.trace_path = resolve(v.get<std::string>(), base_dir);
      have_trace = true;
    } else if (key == "report") {
      if (!v.is_string()) throw ValidationError("experiment: report must be a path string");
      cfg.report_path = resolve(v.get<std::string>(), base_dir);
      have_report = true;
    } else if (key == "rate_window") {
      cfg.rate_window = parse_window(v, "experiment rate_window");
    } else if (key == "small_o_checkpoints") {
      if (!v.is_array()) throw ValidationError("experiment: small_o_checkpoints must be an array");
      std::vector<std::size_t> ks;
      for (const auto& e : v) {
        if (!e.is_number_integer() || e.get<long long>() < 1) throw ValidationError("experiment: checkpoints must be >= 1");
        ks.push_back(e.get<std::size_t>());
      }
      cfg.small_o_checkpoints = std::move(ks);
    } else {
      throw ValidationError("experiment: unknown field \"" + key + "\"");
    }
  }
  if (!have_problem) throw ValidationError("experiment: missing field \"problem\"");
  if (!have_trace) throw ValidationError("experiment: missing field \"trace\"");
  if (!have_report) throw ValidationError("experiment: missing field \"report\"");
  return cfg;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  LoadedProblem loaded = load_problem(config);
  ExperimentResult out;
  out.solve = solve(loaded.problem, config.solver, loaded.oracle ? std::optional(loaded.oracle->f_star) : std::nullopt);
  out.report = build_report(loaded, config, out.solve);
  out.oracle = std::move(loaded.oracle);
  return out;
}

int run_experiment_file(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err) {
  ExperimentConfig config;
  LoadedProblem loaded;
  try {
    config = experiment_from_json(read_json_file(config_path), config_path.parent_path());
    loaded = load_problem(config);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  SolveResult result;
  Json report;
  try {
    result = solve(loaded.problem, config.solver,
                   loaded.oracle ? std::optional(loaded.oracle->f_star) : std::nullopt);
    report = build_report(loaded, config, result);
  } catch (const std::exception& e) {
    err << "solver error: " << e.what() << '\n';
    return kExitSolver;
  }
  try {
    write_trace_csv(result.trace.records, config.trace_path);
    write_json_file(report, config.report_path);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  for (const auto& w : result.trace.warnings) err << "warning: " << w.message << '\n';
  out << "iterations " << result.solution.iterations << ", stop " << to_string(result.solution.stop_reason)
      << ", final R " << format_g17(result.solution.final_R) << '\n';
  return kExitOk;
}

}  // namespace mbadmm
