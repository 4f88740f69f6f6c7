#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <sstream>

#include "mbadmm/errors.hpp"
#include "mbadmm/experiment.hpp"

namespace py = pybind11;
using namespace mbadmm;

namespace {

std::vector<std::vector<double>> blocks_to_lists(const BlockVectors& u) {
  std::vector<std::vector<double>> out;
  for (const auto& x : u) out.push_back(x.values());
  return out;
}

BlockVectors lists_to_blocks(const std::vector<std::vector<double>>& u) {
  BlockVectors out;
  for (const auto& x : u) out.emplace_back(x);
  return out;
}

GammaMode parse_mode(const std::string& s) {
  if (s == "convergence" || s == "conv") return GammaMode::Convergence;
  if (s == "monotonicity" || s == "mono") return GammaMode::Monotonicity;
  throw ValidationError("unknown gamma mode \"" + s + "\"");
}

py::dict oracle_dict(const OracleSolution& o) {
  py::dict d;
  d["u_star"] = blocks_to_lists(o.u_star);
  d["lambda_star"] = o.lambda_star.values();
  d["f_star"] = o.f_star;
  return d;
}

py::dict trace_columns(const std::vector<IterationRecord>& records) {
  std::vector<std::size_t> k;
  std::vector<double> objective, feasibility, r, erg_obj, erg_feas;
  std::vector<std::optional<double>> obj_err, erg_obj_err;
  for (const auto& rec : records) {
    k.push_back(rec.k);
    objective.push_back(rec.objective);
    feasibility.push_back(rec.feasibility);
    r.push_back(rec.R);
    erg_obj.push_back(rec.ergodic_objective);
    erg_feas.push_back(rec.ergodic_feasibility);
    obj_err.push_back(rec.obj_error);
    erg_obj_err.push_back(rec.ergodic_obj_error);
  }
  py::dict d;
  d["k"] = k;
  d["objective"] = objective;
  d["feasibility"] = feasibility;
  d["R"] = r;
  d["ergodic_objective"] = erg_obj;
  d["ergodic_feasibility"] = erg_feas;
  d["obj_error"] = obj_err;
  d["ergodic_obj_error"] = erg_obj_err;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multi-block ADMM for separable convex quadratic programs";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<NoGuaranteeError>(m, "NoGuaranteeError", base.ptr());
  py::register_exception<UnsupportedError>(m, "UnsupportedError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<InsufficientDataError>(m, "InsufficientDataError", base.ptr());

  py::class_<Problem>(m, "Problem")
      .def_static(
          "from_json", [](const std::string& text) { return problem_from_json(Json::parse(text)); }, py::arg("text"))
      .def_static(
          "load", [](const std::string& path) { return read_problem_file(path); }, py::arg("path"))
      .def("to_json", [](const Problem& p) { return problem_to_json(p).dump(); })
      .def("save", [](const Problem& p, const std::string& path) { write_problem_file(p, path); }, py::arg("path"))
      .def_property_readonly("num_blocks", &Problem::num_blocks)
      .def_property_readonly("rows", &Problem::rows)
      .def_property_readonly("dims",
                             [](const Problem& p) {
                               std::vector<std::size_t> d;
                               for (const auto& b : p.blocks) d.push_back(b.dim());
                               return d;
                             })
      .def("validate",
           [](const Problem& p) {
             std::vector<std::string> out;
             for (const auto& issue : validate(p)) out.push_back(issue.message);
             return out;
           })
      .def("objective", [](const Problem& p, const std::vector<std::vector<double>>& u) {
        return objective(p, lists_to_blocks(u));
      })
      .def("__eq__", [](const Problem& a, const Problem& b) { return a == b; });

  m.def(
      "generate_qp",
      [](std::uint64_t seed, std::vector<std::size_t> dims, std::size_t rows, std::pair<double, double> sigma_range,
         double matrix_scale, double solution_scale, bool singular_first_block) {
        GeneratorSpec spec;
        spec.seed = seed;
        spec.num_blocks = dims.size();
        spec.dims = std::move(dims);
        spec.rows = rows;
        spec.sigma_range = sigma_range;
        spec.matrix_scale = matrix_scale;
        spec.solution_scale = solution_scale;
        spec.singular_first_block = singular_first_block;
        auto inst = generate_qp(spec);
        return py::make_tuple(std::move(inst.problem), oracle_dict(inst.oracle));
      },
      py::arg("seed"), py::arg("dims"), py::arg("rows"), py::arg("sigma_range") = std::pair{1.0, 2.0},
      py::arg("matrix_scale") = 1.0, py::arg("solution_scale") = 1.0, py::arg("singular_first_block") = false,
      "Random QP with a planted KKT point; returns (problem, oracle).");

  m.def(
      "oracle_solve_eq_qp", [](const Problem& p) { return oracle_dict(oracle_solve_eq_qp(p)); }, py::arg("problem"));

  m.def(
      "gamma_bound", [](const Problem& p, const std::string& mode) { return gamma_bound(p, parse_mode(mode)); },
      py::arg("problem"), py::arg("mode") = "convergence");

  m.def("residual_weight", &residual_weight, py::arg("num_blocks"), py::arg("block"));

  m.def(
      "kkt_residual",
      [](const Problem& p, const std::vector<std::vector<double>>& u, const std::vector<double>& lambda) {
        const auto r = kkt_residual(p, lists_to_blocks(u), Vector(lambda));
        py::dict d;
        d["stationarity"] = r.stationarity;
        d["primal_feasibility"] = r.primal_feasibility;
        return d;
      },
      py::arg("problem"), py::arg("u"), py::arg("lam"));

  m.def(
      "solve",
      [](const Problem& p, std::optional<double> gamma, const std::string& auto_mode, double safety,
         std::size_t max_iters, double tol_R, std::optional<double> f_star,
         std::optional<std::vector<std::vector<double>>> init_x, std::optional<std::vector<double>> init_lambda) {
        SolverConfig cfg;
        if (gamma) {
          cfg.gamma = ExplicitGamma{*gamma};
        } else {
          cfg.gamma = AutoGamma{parse_mode(auto_mode), safety};
        }
        cfg.max_iters = max_iters;
        cfg.tol_R = tol_R;
        if (init_x) cfg.init_x = lists_to_blocks(*init_x);
        if (init_lambda) cfg.init_lambda = Vector(*init_lambda);
        SolveResult res;
        {
          py::gil_scoped_release release;
          res = solve(p, cfg, f_star);
        }
        py::dict d;
        d["u"] = blocks_to_lists(res.solution.u);
        d["lam"] = res.solution.lambda.values();
        d["iterations"] = res.solution.iterations;
        d["stop_reason"] = to_string(res.solution.stop_reason);
        d["final_R"] = res.solution.final_R;
        d["gamma"] = res.trace.gamma;
        std::vector<std::string> warnings;
        for (const auto& w : res.trace.warnings) warnings.push_back(to_string(w.kind));
        d["warnings"] = warnings;
        d["guarantees"] = py::dict(py::arg("ergodic_rate") = res.trace.guarantees.ergodic_rate,
                                   py::arg("monotone_residual") = res.trace.guarantees.monotone_residual,
                                   py::arg("small_o_residual") = res.trace.guarantees.small_o_residual);
        d["trace"] = trace_columns(res.trace.records);
        return d;
      },
      py::arg("problem"), py::arg("gamma") = py::none(), py::arg("auto") = "convergence", py::arg("safety") = 0.99,
      py::arg("max_iters") = 10000, py::arg("tol_R") = 1e-12, py::arg("f_star") = py::none(),
      py::arg("init_x") = py::none(), py::arg("init_lambda") = py::none(),
      "Run ADMM. An explicit gamma overrides the auto mode.");

  m.def(
      "rate_fit",
      [](const std::vector<std::size_t>& k, const std::vector<double>& values, std::pair<std::size_t, std::size_t> window) {
        if (k.size() != values.size()) throw ValidationError("rate_fit: k and values differ in length");
        std::vector<IterationRecord> records(k.size());
        for (std::size_t i = 0; i < k.size(); ++i) {
          records[i].k = k[i];
          records[i].R = values[i];
        }
        const RateFit fit = rate_fit(records, TraceField::R, window);
        py::dict d;
        d["slope"] = fit.slope;
        d["intercept"] = fit.intercept;
        d["r_squared"] = fit.r_squared;
        d["samples"] = fit.samples;
        d["excluded"] = fit.excluded;
        return d;
      },
      py::arg("k"), py::arg("values"), py::arg("window"), "Least-squares slope of log(value) against log(k).");

  m.def(
      "run_experiment",
      [](const std::string& path) {
        std::ostringstream out;
        std::ostringstream err;
        const int code = run_experiment_file(path, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("config_path"), "Run an experiment document; returns (exit_code, stdout, stderr).");
}
