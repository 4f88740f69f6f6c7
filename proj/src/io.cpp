#include "mbadmm/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "mbadmm/errors.hpp"

namespace mbadmm {
namespace {

constexpr const char* kCsvHeader =
    "k,objective,feasibility,R,ergodic_objective,ergodic_feasibility,obj_error,ergodic_obj_error";

void reject_unknown(const Json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ValidationError(where + ": expected a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!ok.count(key)) throw ValidationError(where + ": unknown field \"" + key + "\"");
  }
}

const Json& require(const Json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(where + ": missing field \"" + key + "\"");
  return *it;
}

double as_double(const Json& v, const std::string& where) {
  if (!v.is_number()) throw ValidationError(where + ": expected a number");
  return v.get<double>();
}

std::size_t as_count(const Json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ValidationError(where + ": expected a nonnegative integer");
  return v.get<std::size_t>();
}

Vector as_vector(const Json& v, const std::string& where) {
  if (!v.is_array()) throw ValidationError(where + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(as_double(e, where));
  return Vector(std::move(out));
}

Matrix as_matrix(const Json& v, const std::string& where) {
  if (!v.is_array()) throw ValidationError(where + ": expected an array of rows");
  const std::size_t rows = v.size();
  const std::size_t cols = rows == 0 ? 0 : v.front().size();
  std::vector<double> data;
  data.reserve(rows * cols);
  for (const auto& row : v) {
    if (!row.is_array() || row.size() != cols) throw ValidationError(where + ": rows must be arrays of equal length");
    for (const auto& e : row) data.push_back(as_double(e, where));
  }
  return Matrix(rows, cols, std::move(data));
}

Json vector_json(const Vector& v) { return Json(v.values()); }

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    rows.push_back(Json(std::vector<double>(row.begin(), row.end())));
  }
  return rows;
}

BlockSpec block_from_json(const Json& doc, std::size_t i) {
  const std::string where = "problem " + block_name(i);
  reject_unknown(doc, {"dim", "Q", "q", "constant", "set", "sigma"}, where);
  BlockSpec block;
  const std::size_t dim = as_count(require(doc, "dim", where), where + " dim");
  block.Q = as_matrix(require(doc, "Q", where), where + " Q");
  block.q = as_vector(require(doc, "q", where), where + " q");
  block.constant = as_double(require(doc, "constant", where), where + " constant");
  if (block.q.size() != dim) throw ValidationError(where + ": q length does not match dim");
  const Json& set = require(doc, "set", where);
  const std::string type = require(set, "type", where + " set").is_string() ? set["type"].get<std::string>() : "";
  if (type == "free") {
    reject_unknown(set, {"type"}, where + " set");
    block.set = FullSpace{};
  } else if (type == "box") {
    reject_unknown(set, {"type", "lo", "hi"}, where + " set");
    block.set = Box{as_vector(require(set, "lo", where), where + " lo"), as_vector(require(set, "hi", where), where + " hi")};
  } else {
    throw ValidationError(where + ": set type must be \"free\" or \"box\"");
  }
  if (const auto it = doc.find("sigma"); it != doc.end()) block.sigma = as_double(*it, where + " sigma");
  return block;
}

}  // namespace

Problem problem_from_json(const Json& doc) {
  reject_unknown(doc, {"blocks", "A", "b"}, "problem");
  Problem p;
  const Json& blocks = require(doc, "blocks", "problem");
  if (!blocks.is_array()) throw ValidationError("problem: blocks must be an array");
  for (std::size_t i = 0; i < blocks.size(); ++i) p.blocks.push_back(block_from_json(blocks[i], i));
  const Json& a = require(doc, "A", "problem");
  if (!a.is_array()) throw ValidationError("problem: A must be an array of matrices");
  for (std::size_t i = 0; i < a.size(); ++i) p.A.push_back(as_matrix(a[i], "problem A[" + std::to_string(i) + "]"));
  p.b = as_vector(require(doc, "b", "problem"), "problem b");
  return p;
}

Json problem_to_json(const Problem& problem) {
  Json blocks = Json::array();
  for (const auto& block : problem.blocks) {
    Json j;
    j["dim"] = block.dim();
    j["Q"] = matrix_json(block.Q);
    j["q"] = vector_json(block.q);
    j["constant"] = block.constant;
    if (const auto* box = std::get_if<Box>(&block.set)) {
      j["set"] = {{"type", "box"}, {"lo", vector_json(box->lo)}, {"hi", vector_json(box->hi)}};
    } else {
      j["set"] = {{"type", "free"}};
    }
    if (block.sigma) j["sigma"] = *block.sigma;
    blocks.push_back(std::move(j));
  }
  Json a = Json::array();
  for (const auto& m : problem.A) a.push_back(matrix_json(m));
  return {{"blocks", std::move(blocks)}, {"A", std::move(a)}, {"b", vector_json(problem.b)}};
}

Problem read_problem_file(const std::filesystem::path& path) { return problem_from_json(read_json_file(path)); }

void write_problem_file(const Problem& problem, const std::filesystem::path& path) {
  write_json_file(problem_to_json(problem), path);
}

OracleSolution oracle_from_json(const Json& doc) {
  reject_unknown(doc, {"u_star", "lambda_star", "f_star"}, "oracle");
  OracleSolution o;
  const Json& u = require(doc, "u_star", "oracle");
  if (!u.is_array()) throw ValidationError("oracle: u_star must be an array");
  for (const auto& x : u) o.u_star.push_back(as_vector(x, "oracle u_star"));
  o.lambda_star = as_vector(require(doc, "lambda_star", "oracle"), "oracle lambda_star");
  o.f_star = as_double(require(doc, "f_star", "oracle"), "oracle f_star");
  return o;
}

Json oracle_to_json(const OracleSolution& oracle) {
  Json u = Json::array();
  for (const auto& x : oracle.u_star) u.push_back(vector_json(x));
  return {{"u_star", std::move(u)}, {"lambda_star", vector_json(oracle.lambda_star)}, {"f_star", oracle.f_star}};
}

GeneratorSpec generator_spec_from_json(const Json& doc) {
  const std::string where = "generator";
  reject_unknown(doc,
                 {"seed", "N", "dims", "p", "sigma_range", "matrix_scale", "solution_scale", "singular_first_block"},
                 where);
  GeneratorSpec spec;
  const Json& seed = require(doc, "seed", where);
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0))
    throw ValidationError(where + ": seed must be a nonnegative integer");
  spec.seed = seed.get<std::uint64_t>();
  spec.num_blocks = as_count(require(doc, "N", where), where + " N");
  const Json& dims = require(doc, "dims", where);
  if (!dims.is_array()) throw ValidationError(where + ": dims must be an array");
  spec.dims.clear();
  for (const auto& d : dims) spec.dims.push_back(as_count(d, where + " dims"));
  spec.rows = as_count(require(doc, "p", where), where + " p");
  if (const auto it = doc.find("sigma_range"); it != doc.end()) {
    if (!it->is_array() || it->size() != 2) throw ValidationError(where + ": sigma_range must be [lo, hi]");
    spec.sigma_range = {as_double((*it)[0], where), as_double((*it)[1], where)};
  }
  if (const auto it = doc.find("matrix_scale"); it != doc.end()) spec.matrix_scale = as_double(*it, where);
  if (const auto it = doc.find("solution_scale"); it != doc.end()) spec.solution_scale = as_double(*it, where);
  if (const auto it = doc.find("singular_first_block"); it != doc.end()) {
    if (!it->is_boolean()) throw ValidationError(where + ": singular_first_block must be a boolean");
    spec.singular_first_block = it->get<bool>();
  }
  check_generator_spec(spec);
  return spec;
}

std::string format_g17(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string format_short(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

Json json_number(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return value;
}

void write_trace_csv(const std::vector<IterationRecord>& records, std::ostream& out) {
  out << kCsvHeader << '\n';
  auto opt = [](const std::optional<double>& v) { return v ? format_g17(*v) : std::string(); };
  for (const auto& r : records) {
    out << r.k << ',' << format_g17(r.objective) << ',' << format_g17(r.feasibility) << ',' << format_g17(r.R) << ','
        << format_g17(r.ergodic_objective) << ',' << format_g17(r.ergodic_feasibility) << ',' << opt(r.obj_error)
        << ',' << opt(r.ergodic_obj_error) << '\n';
  }
}

void write_trace_csv(const std::vector<IterationRecord>& records, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open " + path.string() + " for writing");
  write_trace_csv(records, f);
  if (!f) throw ValidationError("failed writing " + path.string());
}

std::vector<IterationRecord> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("trace CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw ValidationError("trace CSV has an unexpected header");
  std::vector<IterationRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (cells.size() != 8) throw ValidationError("trace CSV line " + std::to_string(lineno) + ": expected 8 fields");
    auto num = [&](const std::string& s) {
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (s.empty() || end != s.c_str() + s.size())
        throw ValidationError("trace CSV line " + std::to_string(lineno) + ": bad number \"" + s + "\"");
      return v;
    };
    IterationRecord r;
    r.k = static_cast<std::size_t>(num(cells[0]));
    r.objective = num(cells[1]);
    r.feasibility = num(cells[2]);
    r.R = num(cells[3]);
    r.ergodic_objective = num(cells[4]);
    r.ergodic_feasibility = num(cells[5]);
    if (!cells[6].empty()) r.obj_error = num(cells[6]);
    if (!cells[7].empty()) r.ergodic_obj_error = num(cells[7]);
    out.push_back(r);
  }
  return out;
}

std::vector<IterationRecord> read_trace_csv(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open " + path.string());
  return read_trace_csv(f);
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open " + path.string());
  try {
    return Json::parse(f);
  } catch (const Json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_json_file(const Json& doc, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open " + path.string() + " for writing");
  f << doc.dump(2) << '\n';
  if (!f) throw ValidationError("failed writing " + path.string());
}

}  // namespace mbadmm
