#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <ostream>

#include "mbadmm/errors.hpp"
#include "mbadmm/experiment.hpp"

namespace mbadmm {
namespace {

GammaMode mode_from_flag(const std::string& s) {
  return s == "mono" || s == "monotonicity" ? GammaMode::Monotonicity : GammaMode::Convergence;
}

const std::vector<std::string> kModeNames = {"conv", "mono", "convergence", "monotonicity"};

int cmd_solve(const std::string& problem_path, const std::optional<double>& gamma,
              const std::optional<std::string>& auto_mode, std::size_t max_iters, double tol,
              const std::string& trace_path, std::ostream& out, std::ostream& err) {
  Problem problem;
  SolverConfig cfg;
  try {
    problem = read_problem_file(problem_path);
    require_valid(problem);
    cfg.max_iters = max_iters;
    cfg.tol_R = tol;
    if (gamma) {
      cfg.gamma = ExplicitGamma{*gamma};
    } else if (auto_mode) {
      cfg.gamma = AutoGamma{mode_from_flag(*auto_mode)};
    } else if (problem.num_blocks() == 2) {
      // Any γ > 0 is admissible for two blocks.
      cfg.gamma = ExplicitGamma{1.0};
    }
    check_config(cfg);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  SolveResult result;
  try {
    result = solve(problem, cfg);
  } catch (const std::exception& e) {
    err << "solver error: " << e.what() << '\n';
    return kExitSolver;
  }
  for (const auto& w : result.trace.warnings) err << "warning: " << w.message << '\n';
  if (!trace_path.empty()) {
    try {
      write_trace_csv(result.trace.records, std::filesystem::path(trace_path));
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kExitUsage;
    }
  }
  const auto& last = result.trace.records.back();
  out << "gamma " << format_g17(result.trace.gamma) << '\n'
      << "iterations " << result.solution.iterations << '\n'
      << "stop_reason " << to_string(result.solution.stop_reason) << '\n'
      << "final_R " << format_g17(result.solution.final_R) << '\n'
      << "objective " << format_g17(last.objective) << '\n'
      << "feasibility " << format_g17(last.feasibility) << '\n';
  for (std::size_t i = 0; i < result.solution.u.size(); ++i) {
    out << "x" << (i + 1);
    for (double v : result.solution.u[i].values()) out << ' ' << format_g17(v);
    out << '\n';
  }
  out << "lambda";
  for (double v : result.solution.lambda.values()) out << ' ' << format_g17(v);
  out << '\n';
  return kExitOk;
}

int cmd_bound(const std::string& problem_path, const std::string& mode, std::ostream& out, std::ostream& err) {
  Problem problem;
  try {
    problem = read_problem_file(problem_path);
    require_valid(problem);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    out << format_short(gamma_bound(problem, mode_from_flag(mode))) << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitSolver;
  }
  return kExitOk;
}

int cmd_generate(GeneratorSpec spec, const std::string& out_path, const std::string& oracle_path,
                 std::ostream& err) {
  try {
    const GeneratedInstance inst = generate_qp(spec);
    write_problem_file(inst.problem, out_path);
    if (!oracle_path.empty()) write_json_file(oracle_to_json(inst.oracle), oracle_path);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

int cmd_rates(const std::string& trace_path, const std::string& field_name_str,
              const std::vector<std::size_t>& window, std::ostream& out, std::ostream& err) {
  std::vector<IterationRecord> records;
  TraceField field{};
  try {
    const auto parsed = parse_trace_field(field_name_str);
    if (!parsed) throw ValidationError("unknown trace field \"" + field_name_str + "\"");
    field = *parsed;
    records = read_trace_csv(std::filesystem::path(trace_path));
    if (!window.empty() && window.size() != 2) throw ValidationError("--window expects two values a,b");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    const std::size_t k_max = records.empty() ? 0 : records.back().k;
    const auto w = window.empty() ? default_rate_window(k_max) : std::pair{window[0], window[1]};
    const RateFit fit = rate_fit(records, field, w);
    const Json doc = {{"field", field_name_str},
                      {"slope", fit.slope},
                      {"intercept", fit.intercept},
                      {"r_squared", fit.r_squared},
                      {"window", {fit.window.first, fit.window.second}},
                      {"samples", fit.samples},
                      {"excluded", fit.excluded}};
    out << doc.dump(2) << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitSolver;
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-block ADMM for separable convex QPs", "mbadmm"};
  app.require_subcommand(1);

  std::string problem_path;
  std::optional<double> gamma;
  std::optional<std::string> auto_mode;
  std::size_t max_iters = 10000;
  double tol = 1e-12;
  std::string trace_path;
  auto* solve_cmd = app.add_subcommand("solve", "Run ADMM on a problem file");
  solve_cmd->add_option("problem", problem_path, "Problem JSON")->required();
  auto* gamma_opt = solve_cmd->add_option("--gamma", gamma, "Explicit penalty γ > 0");
  solve_cmd->add_option("--auto-gamma", auto_mode, "Pick γ from a bound")
      ->check(CLI::IsMember(kModeNames))
      ->excludes(gamma_opt);
  solve_cmd->add_option("--max-iters", max_iters, "Iteration cap")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--tol", tol, "Stop when R_k <= tol");
  solve_cmd->add_option("--trace", trace_path, "Write the iteration trace as CSV");

  std::string bound_path;
  std::string bound_mode = "conv";
  auto* bound_cmd = app.add_subcommand("bound", "Print the admissible γ bound");
  bound_cmd->add_option("problem", bound_path, "Problem JSON")->required();
  bound_cmd->add_option("--mode", bound_mode, "conv or mono")->check(CLI::IsMember(kModeNames));

  GeneratorSpec spec;
  std::string gen_out;
  std::string gen_oracle;
  std::vector<double> sigma_range;
  bool singular = false;
  auto* gen_cmd = app.add_subcommand("generate", "Generate a QP with a planted solution");
  gen_cmd->add_option("--seed", spec.seed, "RNG seed")->required();
  gen_cmd->add_option("--blocks", spec.num_blocks, "Number of blocks N")->required();
  gen_cmd->add_option("--dims", spec.dims, "Block dimensions d1,d2,...")->required()->delimiter(',');
  gen_cmd->add_option("--rows", spec.rows, "Constraint rows p")->required();
  gen_cmd->add_option("--out", gen_out, "Problem output path")->required();
  gen_cmd->add_option("--oracle", gen_oracle, "Oracle output path");
  gen_cmd->add_option("--sigma-range", sigma_range, "lo,hi")->delimiter(',')->expected(2);
  gen_cmd->add_option("--matrix-scale", spec.matrix_scale, "Scale of the B_i factors");
  gen_cmd->add_option("--solution-scale", spec.solution_scale, "Scale of the planted solution");
  gen_cmd->add_flag("--singular-first", singular, "Generate block 1 with σ_1 = 0");

  std::string experiment_path;
  auto* verify_cmd = app.add_subcommand("verify", "Run an experiment document");
  verify_cmd->add_option("experiment", experiment_path, "Experiment JSON")->required();

  std::string rates_path;
  std::string rates_field;
  std::vector<std::size_t> rates_window;
  auto* rates_cmd = app.add_subcommand("rates", "Fit a log-log rate to a trace column");
  rates_cmd->add_option("trace", rates_path, "Trace CSV")->required();
  rates_cmd->add_option("--field", rates_field, "Trace column")->required();
  rates_cmd->add_option("--window", rates_window, "k_lo,k_hi")->delimiter(',')->expected(2);

  // CLI11 consumes arguments from the back.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help("", CLI::AppFormatMode::All);
    return kExitUsage;
  }

  if (*solve_cmd) return cmd_solve(problem_path, gamma, auto_mode, max_iters, tol, trace_path, out, err);
  if (*bound_cmd) return cmd_bound(bound_path, bound_mode, out, err);
  if (*gen_cmd) {
    if (!sigma_range.empty()) spec.sigma_range = {sigma_range[0], sigma_range[1]};
    spec.singular_first_block = singular;
    return cmd_generate(spec, gen_out, gen_oracle, err);
  }
  if (*verify_cmd) return run_experiment_file(experiment_path, out, err);
  return cmd_rates(rates_path, rates_field, rates_window, out, err);
}

}  // namespace mbadmm
