#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mbadmm/harness.hpp"
#include "mbadmm/io.hpp"
#include "mbadmm/solver.hpp"

namespace mbadmm {

struct ProblemFromFile {
  std::filesystem::path path;
};

struct ExperimentConfig {
  std::variant<ProblemFromFile, GeneratorSpec> problem;
  SolverConfig solver;
  std::filesystem::path trace_path;
  std::filesystem::path report_path;
  std::optional<std::pair<std::size_t, std::size_t>> rate_window;
  std::optional<std::vector<std::size_t>> small_o_checkpoints;
};

/// Relative paths are resolved against `base_dir`.
ExperimentConfig experiment_from_json(const Json& doc, const std::filesystem::path& base_dir = {});
SolverConfig solver_config_from_json(const Json& doc);

struct ExperimentResult {
  SolveResult solve;
  std::optional<OracleSolution> oracle;
  Json report;
};

/// Exit codes shared by the experiment runner and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitSolver = 3;

/// Loads the problem (ValidationError on bad input), solves it (other errors)
/// and assembles the report. Writes nothing.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Full pipeline including output files; returns an exit code.
int run_experiment_file(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err);

/// Command-line entry point; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mbadmm
