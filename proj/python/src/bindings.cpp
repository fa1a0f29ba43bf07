#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "fpsi/cli_io.hpp"

namespace py = pybind11;
using namespace fpsi;

namespace {

py::dict row_dict(const ErrorRow& r) {
  py::dict d;
  d["dt"] = r.dt;
  for (int i = 0; i < ErrorRow::n_norms; ++i) d[ErrorRow::norm_name(i)] = r.norm(i);
  d["average_iterations"] = r.average_iterations;
  return d;
}

py::dict summary_dict(const RunSummary& s) {
  py::dict d;
  d["steps"] = s.steps;
  d["average_iterations"] = s.average_iterations;
  d["not_converged"] = s.not_converged;
  d["E0"] = s.E0;
  d["EN"] = s.EN;
  d["sum_D"] = s.sum_D;
  d["sum_S"] = s.sum_S;
  return d;
}

// Free decay on the unit-square pair: zero data, smooth initial state.
py::dict free_decay(int n, double dt, int steps, SchemeKind scheme, const PhysicalParams& params, DarcyPair darcy) {
  auto [fluid, poro] = example1_meshes(n);
  const auto d = make_discretization(std::move(fluid), std::move(poro), darcy);
  const SchemeContext ctx(d, example1_free_problem(params), dt);
  RunOptions opt;
  opt.scheme = scheme;
  std::vector<std::array<double, 4>> history;
  const StepObserver record = [&](const CoupledState&, const StepRecord& r) {
    history.push_back({r.t, r.energy.E, r.energy.D, r.energy.S});
  };
  RunSummary s;
  {
    py::gil_scoped_release release;
    s = run(ctx, example1_free_state(*d, params), steps * dt, opt, {record});
  }
  py::dict out = summary_dict(s);
  out["history"] = history;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Stokes-Biot interaction solver: partitioned Robin-Robin and monolithic schemes.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::enum_<SchemeKind>(m, "Scheme")
      .value("noniterative", SchemeKind::NonIterative)
      .value("iterative", SchemeKind::Iterative)
      .value("monolithic", SchemeKind::Monolithic);
  py::enum_<DarcyPair>(m, "DarcyPair").value("RT0", DarcyPair::RT0P0).value("RT1", DarcyPair::RT1P1dc);
  py::enum_<ExperimentKind>(m, "Experiment")
      .value("example1", ExperimentKind::Example1)
      .value("example2", ExperimentKind::Example2)
      .value("custom", ExperimentKind::Custom);

  py::class_<PhysicalParams>(m, "PhysicalParams")
      .def(py::init<>())
      .def_readwrite("mu_f", &PhysicalParams::mu_f)
      .def_readwrite("rho_f", &PhysicalParams::rho_f)
      .def_readwrite("rho_p", &PhysicalParams::rho_p)
      .def_readwrite("mu_p", &PhysicalParams::mu_p)
      .def_readwrite("lambda_p", &PhysicalParams::lambda_p)
      .def_readwrite("s0", &PhysicalParams::s0)
      .def_readwrite("K", &PhysicalParams::K)
      .def_readwrite("alpha", &PhysicalParams::alpha)
      .def_readwrite("alpha_BJS", &PhysicalParams::alpha_BJS)
      .def_readwrite("gamma_BJS", &PhysicalParams::gamma_BJS)
      .def_readwrite("gamma_f", &PhysicalParams::gamma_f)
      .def_readwrite("gamma_p", &PhysicalParams::gamma_p)
      .def_readwrite("beta", &PhysicalParams::beta)
      .def_readwrite("quasistatic_fluid", &PhysicalParams::quasistatic_fluid)
      .def_readwrite("allow_zero_storativity", &PhysicalParams::allow_zero_storativity)
      .def("validate", &PhysicalParams::validate);
  m.def("example2_params", &example2_params, "Coefficients of the blood-flow benchmark.");

  py::class_<PulseBC>(m, "PulseBC")
      .def(py::init<>())
      .def_readwrite("P_max", &PulseBC::P_max)
      .def_readwrite("T_max", &PulseBC::T_max)
      .def("__call__", &PulseBC::operator());

  py::class_<IterationControl>(m, "IterationControl")
      .def(py::init<>())
      .def_readwrite("eps", &IterationControl::eps)
      .def_readwrite("k_max", &IterationControl::k_max)
      .def_readwrite("fixed", &IterationControl::fixed);

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("experiment", &RunConfig::experiment)
      .def_readwrite("scheme", &RunConfig::scheme)
      .def_readwrite("dts", &RunConfig::dts)
      .def_readwrite("T", &RunConfig::T)
      .def_readwrite("n", &RunConfig::n)
      .def_readwrite("nx", &RunConfig::nx)
      .def_readwrite("ny_fluid", &RunConfig::ny_fluid)
      .def_readwrite("ny_wall", &RunConfig::ny_wall)
      .def_readwrite("darcy", &RunConfig::darcy)
      .def_readwrite("flux_sides", &RunConfig::flux_sides)
      .def_readwrite("params", &RunConfig::params)
      .def_readwrite("pulse", &RunConfig::pulse)
      .def_readwrite("honor_bjs", &RunConfig::honor_bjs)
      .def_readwrite("slice_times", &RunConfig::slice_times)
      .def_readwrite("iteration", &RunConfig::iteration)
      .def_readwrite("out_dir", &RunConfig::out_dir)
      .def_readwrite("write_vtk", &RunConfig::write_vtk)
      .def_readwrite("vtk_every", &RunConfig::vtk_every)
      .def_readwrite("write_jsonl", &RunConfig::write_jsonl)
      .def_readwrite("write_mu", &RunConfig::write_mu)
      .def("validate", [](const RunConfig& c) { validate(c); })
      .def("to_text", [](const RunConfig& c) { return to_config_text(c); });

  m.def("default_config", &default_config, py::arg("experiment"));
  m.def("parse_config", &parse_config, py::arg("text"), py::arg("overrides") = ConfigOverrides{},
        "Parse config text; overrides are (key path, value) pairs.");
  m.def("load_config", &load_config, py::arg("path"), py::arg("overrides") = ConfigOverrides{});

  m.def(
      "run_command",
      [](const RunConfig& c) {
        std::ostringstream log;
        RunReport r;
        {
          py::gil_scoped_release release;
          r = run_command(c, log);
        }
        py::dict out;
        out["out_dir"] = r.out_dir;
        out["files"] = r.files;
        out["not_converged"] = r.not_converged;
        out["log"] = log.str();
        py::list rows;
        for (const ErrorRow& row : r.table.rows) rows.append(row_dict(row));
        out["rows"] = rows;
        return out;
      },
      py::arg("config"), "Run a configured experiment and write its artifacts.");

  m.def(
      "convergence_study",
      [](int n, const std::vector<double>& dts, SchemeKind scheme, const PhysicalParams& params, double T,
         DarcyPair darcy, const IterationControl& iteration) {
        Example1Setup setup;
        setup.n = n;
        setup.params = params;
        setup.darcy = darcy;
        RunOptions run;
        run.scheme = scheme;
        run.iteration = iteration;
        run.energies = params.gamma_f == params.gamma_p;
        ConvergenceTable t;
        {
          py::gil_scoped_release release;
          t = convergence_study(setup, dts, run, T);
        }
        py::list rows, rates;
        for (const ErrorRow& r : t.rows) rows.append(row_dict(r));
        for (const auto& r : t.rates()) {
          py::dict d;
          for (int i = 0; i < ErrorRow::n_norms; ++i) d[ErrorRow::norm_name(i)] = r[i];
          rates.append(d);
        }
        py::dict out;
        out["rows"] = rows;
        out["rates"] = rates;
        return out;
      },
      py::arg("n"), py::arg("dts"), py::arg("scheme") = SchemeKind::NonIterative, py::arg("params") = PhysicalParams{},
      py::arg("T") = 1.0, py::arg("darcy") = DarcyPair::RT1P1dc, py::arg("iteration") = IterationControl{},
      "Errors and successive rates of the manufactured-solution test.");

  m.def("free_decay", &free_decay, py::arg("n"), py::arg("dt"), py::arg("steps"),
        py::arg("scheme") = SchemeKind::NonIterative, py::arg("params") = PhysicalParams{},
        py::arg("darcy") = DarcyPair::RT1P1dc, "Energy history of a free-decay run (t, E, D, S per step).");

  py::class_<ManufacturedSolution>(m, "ManufacturedSolution")
      .def(py::init<PhysicalParams>(), py::arg("params") = PhysicalParams{})
      .def("u_f", [](const ManufacturedSolution& e, double t, double x, double y) { return e.u_f(t, {x, y}); })
      .def("p_f", [](const ManufacturedSolution& e, double t, double x, double y) { return e.p_f(t, {x, y}); })
      .def("eta", [](const ManufacturedSolution& e, double t, double x, double y) { return e.eta(t, {x, y}); })
      .def("u_p", [](const ManufacturedSolution& e, double t, double x, double y) { return e.u_p(t, {x, y}); })
      .def("p_p", [](const ManufacturedSolution& e, double t, double x, double y) { return e.p_p(t, {x, y}); });
}
