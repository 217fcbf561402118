#include "pdpap/error.hpp"
#include "pdpap/harness.hpp"
#include "pdpap/io.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace pdpap;

namespace {

py::dict log_columns(const IterationLog& log) {
  auto column = [&](auto member) {
    Vector v(static_cast<Eigen::Index>(log.size()));
    for (std::size_t i = 0; i < log.size(); ++i)
      v[static_cast<Eigen::Index>(i)] = static_cast<double>(log[i].*member);
    return v;
  };
  py::dict out;
  out["k"] = column(&LogRow::k);
  out["t_sec"] = column(&LogRow::t_sec);
  out["c"] = column(&LogRow::c);
  out["relerr"] = column(&LogRow::relerr);
  out["J_exact"] = column(&LogRow::J_exact);
  out["J_inexact"] = column(&LogRow::J_inexact);
  out["res_pde"] = column(&LogRow::res_pde);
  out["res_adj"] = column(&LogRow::res_adj);
  out["res_x"] = column(&LogRow::res_x);
  out["res_y"] = column(&LogRow::res_y);
  return out;
}

} // namespace

PYBIND11_MODULE(_pdpap, m) {
  m.doc() = "Primal-dual proximal splitting with one inner solver step per iteration";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SizeMismatch>(m, "SizeMismatch", PyExc_ValueError);
  py::register_exception<CoercivityError>(m, "CoercivityError", PyExc_ValueError);
  py::register_exception<SingularSystem>(m, "SingularSystem", PyExc_ArithmeticError);
  py::register_exception<SolverBreakdown>(m, "SolverBreakdown", PyExc_ArithmeticError);

  py::enum_<PdeFamily>(m, "PdeFamily")
      .value("ScalarReaction", PdeFamily::ScalarReaction)
      .value("DiffusionReaction", PdeFamily::DiffusionReaction);

  py::enum_<Experiment>(m, "Experiment")
      .value("ScalarCoefficient", Experiment::ScalarCoefficient)
      .value("DiffusionCoefficient", Experiment::DiffusionCoefficient);

  py::enum_<GridSize>(m, "GridSize")
      .value("Coarse", GridSize::Coarse)
      .value("Fine", GridSize::Fine)
      .value("Custom", GridSize::Custom);

  py::class_<GridSpec>(m, "GridSpec")
      .def(py::init<int>(), py::arg("n"))
      .def_property_readonly("n", &GridSpec::n)
      .def_property_readonly("h", &GridSpec::h)
      .def_property_readonly("node_count", &GridSpec::node_count)
      .def_property_readonly("interior_count", &GridSpec::interior_count)
      .def("__repr__", [](const GridSpec& g) { return "GridSpec(" + std::to_string(g.n()) + ")"; });

  py::class_<ControlVector>(m, "Control")
      .def(py::init([](double c, std::optional<Vector> a) { return ControlVector{std::move(a), c}; }),
           py::arg("c"), py::arg("a") = py::none())
      .def_readwrite("c", &ControlVector::c)
      .def_readwrite("a", &ControlVector::a)
      .def("__eq__", [](const ControlVector& x, const ControlVector& y) { return x == y; })
      .def("__repr__", [](const ControlVector& x) {
        return "Control(c=" + io::format_double(x.c) + (x.a ? ", a=<field>)" : ")");
      });

  py::class_<RegConfig>(m, "RegConfig")
      .def(py::init([](double alpha, double lambda, double gamma) {
             return RegConfig{alpha, lambda, gamma};
           }),
           py::arg("alpha") = 0.0, py::arg("lambda_") = 0.1, py::arg("gamma") = 0.0)
      .def_readwrite("alpha", &RegConfig::alpha)
      .def_readwrite("lambda_", &RegConfig::lambda)
      .def_readwrite("gamma", &RegConfig::gamma);

  py::class_<SplittingKind>(m, "SplittingKind")
      .def_static("parse", &SplittingKind::parse)
      .def("__str__", &SplittingKind::to_string)
      .def("__repr__", [](const SplittingKind& k) { return "SplittingKind('" + k.to_string() + "')"; })
      .def("__eq__", [](const SplittingKind& a, const SplittingKind& b) { return a == b; });

  py::class_<SplitterState>(m, "SplitterState")
      .def(py::init([](const SplittingKind& kind, Vector u0) {
             return SplitterState::make(kind, std::move(u0));
           }),
           py::arg("kind"), py::arg("u0"))
      .def_readwrite("u", &SplitterState::u)
      .def_readwrite("p", &SplitterState::p)
      .def_readwrite("fresh", &SplitterState::fresh);

  py::class_<DiagnosticsReport>(m, "DiagnosticsReport")
      .def_readonly("gamma_N", &DiagnosticsReport::gamma_N)
      .def_readonly("alpha", &DiagnosticsReport::alpha)
      .def_readonly("diag_dominant", &DiagnosticsReport::diag_dominant)
      .def_readonly("spd", &DiagnosticsReport::spd)
      .def_readonly("stationary", &DiagnosticsReport::stationary);

  py::class_<AssembledSystem>(m, "AssembledSystem")
      .def_readonly("A", &AssembledSystem::A)
      .def_readonly("rhs", &AssembledSystem::rhs);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def_static("defaults", &ExperimentConfig::defaults, py::arg("experiment"),
                  py::arg("grid") = GridSize::Coarse, py::arg("n") = 51)
      .def_static("parse", &ExperimentConfig::parse)
      .def_static("load", &ExperimentConfig::load)
      .def("serialize", &ExperimentConfig::serialize)
      .def("validate", &ExperimentConfig::validate)
      .def_readwrite("n", &ExperimentConfig::n)
      .def_readwrite("splitting", &ExperimentConfig::splitting)
      .def_readwrite("iterations", &ExperimentConfig::iterations)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("alpha", &ExperimentConfig::alpha)
      .def_readwrite("beta", &ExperimentConfig::beta)
      .def_readwrite("gamma", &ExperimentConfig::gamma)
      .def_readwrite("tau", &ExperimentConfig::tau)
      .def_readwrite("sigma", &ExperimentConfig::sigma)
      .def_readwrite("omega", &ExperimentConfig::omega)
      .def_readwrite("lambda_", &ExperimentConfig::lambda)
      .def_readwrite("m", &ExperimentConfig::m)
      .def_readwrite("log_every", &ExperimentConfig::log_every)
      .def_readwrite("noise_level", &ExperimentConfig::noise_level)
      .def_readwrite("c0", &ExperimentConfig::c0)
      .def_readwrite("a0", &ExperimentConfig::a0)
      .def_readwrite("timing", &ExperimentConfig::timing)
      .def_readwrite("log_residuals", &ExperimentConfig::log_residuals);

  m.def("boundary_data", [](const GridSpec& g, int i) { return boundary_data(g, i).values; },
        py::arg("grid"), py::arg("i"));
  m.def(
      "assemble",
      [](PdeFamily family, const GridSpec& g, const ControlVector& x, int m_conditions) {
        return assemble(family, g, x, boundary_conditions(g, m_conditions));
      },
      py::arg("family"), py::arg("grid"), py::arg("x"), py::arg("m"));
  m.def("prox_F", &prox_F_scalar, py::arg("v"), py::arg("tau"), py::arg("reg"));
  m.def("estimate_K_norm", py::overload_cast<const GridSpec&, double>(&estimate_K_norm),
        py::arg("grid"), py::arg("rel_tol") = 1e-6);
  m.def("split_step", &split_step, py::arg("kind"), py::arg("A"), py::arg("rhs"), py::arg("state"));
  m.def(
      "diagnose", [](const SplittingKind& kind, const SparseMatrix& A) { return diagnose(kind, A); },
      py::arg("kind"), py::arg("A"));
  m.def("diffusion_phantom", &diffusion_phantom, py::arg("grid"));
  m.def("relative_error", &relative_error, py::arg("x"), py::arg("reference"));
  m.def(
      "generate_data",
      [](const ExperimentConfig& cfg) {
        return generate_data(cfg.family(), cfg.grid_spec(), ground_truth(cfg), cfg.m, cfg.seed,
                             cfg.noise_level)
            .z;
      },
      py::arg("config"));
  m.def(
      "run",
      [](const ExperimentConfig& cfg, std::optional<ControlVector> reference, int threads) {
        RunOptions options;
        options.reference = std::move(reference);
        options.threads = threads;
        RunResult result;
        {
          py::gil_scoped_release release;
          result = run_experiment(cfg, options);
        }
        py::dict out;
        out["log"] = log_columns(result.log);
        out["x"] = result.final_state.x;
        out["truth"] = result.truth;
        return out;
      },
      py::arg("config"), py::arg("reference") = py::none(), py::arg("threads") = 0);
  m.def(
      "compute_reference",
      [](const ExperimentConfig& cfg, std::int64_t iterations) {
        py::gil_scoped_release release;
        return compute_reference(cfg, iterations).x;
      },
      py::arg("config"), py::arg("iterations"));
}
