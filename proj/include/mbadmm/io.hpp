#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mbadmm/diagnostics.hpp"
#include "mbadmm/harness.hpp"
#include "mbadmm/problem.hpp"

namespace mbadmm {

using Json = nlohmann::json;

// Problem documents. Parsing is strict: unknown or missing fields raise
// ValidationError.
Problem problem_from_json(const Json& doc);
Json problem_to_json(const Problem& problem);
Problem read_problem_file(const std::filesystem::path& path);
void write_problem_file(const Problem& problem, const std::filesystem::path& path);

OracleSolution oracle_from_json(const Json& doc);
Json oracle_to_json(const OracleSolution& oracle);

GeneratorSpec generator_spec_from_json(const Json& doc);

/// Trace CSV with the fixed header
/// k,objective,feasibility,R,ergodic_objective,ergodic_feasibility,obj_error,ergodic_obj_error
void write_trace_csv(const std::vector<IterationRecord>& records, std::ostream& out);
void write_trace_csv(const std::vector<IterationRecord>& records, const std::filesystem::path& path);
std::vector<IterationRecord> read_trace_csv(std::istream& in);
std::vector<IterationRecord> read_trace_csv(const std::filesystem::path& path);

/// %.17g rendering used in CSV files.
std::string format_g17(double value);
/// Shortest round-trip decimal, always with a fractional part or exponent ("1.0", "0.2", "inf").
std::string format_short(double value);
/// JSON value for a double; ±inf become the strings "inf"/"-inf".
Json json_number(double value);

Json read_json_file(const std::filesystem::path& path);
/// Writes `doc` with two-space indentation and a trailing newline.
void write_json_file(const Json& doc, const std::filesystem::path& path);

}  // namespace mbadmm
