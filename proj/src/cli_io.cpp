#include "fpsi/cli_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace fpsi {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path resolve_output_dir(const std::string& dir) {
  fs::path p(dir);
  if (p.is_relative()) {
    if (const char* root = std::getenv("FPSI_OUTPUT_ROOT"); root && *root) p = fs::path(root) / p;
  }
  return p;
}

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
  return os;
}

void check_written(std::ofstream& os, const fs::path& path) {
  os.flush();
  if (!os) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::string compact(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

json mesh_json(const TriMesh& m) {
  return {{"vertices", m.n_vertices()}, {"triangles", m.n_triangles()}};
}

json mesh_metadata(const RunConfig& c, const Discretization& d) {
  json j = {{"fluid", mesh_json(*d.fluid_mesh)},
            {"poro", mesh_json(*d.poro_mesh)},
            {"darcy", d.darcy_pair == DarcyPair::RT0P0 ? "RT0-P0" : "RT1-P1dc"}};
  if (c.experiment == ExperimentKind::Example2) {
    j["nx"] = c.nx;
    j["ny_fluid"] = c.ny_fluid;
    j["ny_wall"] = c.ny_wall;
    j["note"] = "default structured half-vessel mesh chosen by this code; resolution is a free choice";
  } else {
    j["cells_per_unit_length"] = c.n;
    j["h"] = 1.0 / c.n;
  }
  return j;
}

// Per-run writers hooked into the time loop.
class RunOutputs {
 public:
  RunOutputs(const RunConfig& c, const Discretization& d, const fs::path& dir, std::string tag, RunReport& report,
             std::vector<int> vtk_steps)
      : c_(c), d_(d), dir_(dir), tag_(std::move(tag)), report_(report), vtk_steps_(std::move(vtk_steps)) {
    if (c.write_jsonl) open(jsonl_, "energy" + tag_ + ".jsonl");
    if (c.write_mu) open(mu_, "mu" + tag_ + ".csv");
  }

  StepObserver observer() {
    return [this](const CoupledState& s, const StepRecord& r) {
      if (!r.converged) ++not_converged_;
      if (jsonl_.is_open()) write_jsonl(jsonl_, r);
      if (mu_.is_open()) write_mu_csv(mu_, *d_.lambda, s.mu, s.t, r.step == 0);
      if (c_.write_vtk && wants_vtk(r.step)) snapshot(s, r.step);
    };
  }

  int not_converged() const { return not_converged_; }

  void close() {
    for (auto* os : {&jsonl_, &mu_}) {
      if (os->is_open()) check_written(*os, dir_);
      os->close();
    }
  }

 private:
  void open(std::ofstream& os, const std::string& name) {
    const fs::path p = dir_ / name;
    os = open_out(p);
    report_.files.push_back(p);
  }

  bool wants_vtk(int step) const {
    if (c_.vtk_every > 0) return step % c_.vtk_every == 0;
    return std::find(vtk_steps_.begin(), vtk_steps_.end(), step) != vtk_steps_.end();
  }

  void snapshot(const CoupledState& s, int step) {
    std::ostringstream name;
    name << tag_ << '_' << std::setw(6) << std::setfill('0') << step << ".vtk";
    const fs::path pf = dir_ / ("fluid" + name.str());
    const fs::path pp = dir_ / ("poro" + name.str());
    std::ofstream f = open_out(pf), p = open_out(pp);
    write_fluid_vtk(f, d_, s);
    write_poro_vtk(p, d_, s);
    check_written(f, pf);
    check_written(p, pp);
    report_.files.push_back(pf);
    report_.files.push_back(pp);
  }

  const RunConfig& c_;
  const Discretization& d_;
  fs::path dir_;
  std::string tag_;
  RunReport& report_;
  std::vector<int> vtk_steps_;
  std::ofstream jsonl_, mu_;
  int not_converged_ = 0;
};

RunOptions run_options(const RunConfig& c) {
  RunOptions opt;
  opt.scheme = c.scheme;
  opt.iteration = c.iteration;
  opt.energies = c.params.gamma_f == c.params.gamma_p;
  return opt;
}

int steps_of(double T, double dt) { return static_cast<int>(std::lround(T / dt)); }

json summary_json(const RunSummary& s) {
  return {{"steps", s.steps}, {"average_iterations", s.average_iterations}, {"not_converged", s.not_converged},
          {"E0", s.E0},       {"EN", s.EN},
          {"sum_D", s.sum_D}, {"sum_S", s.sum_S}};
}

void run_example1(const RunConfig& c, const fs::path& dir, RunReport& report, json& results, std::ostream& log) {
  auto [fluid, poro] = example1_meshes(c.n);
  const auto d = make_discretization(std::move(fluid), std::move(poro), c.darcy);
  results["mesh"] = mesh_metadata(c, *d);
  const ManufacturedSolution ex(c.params);
  json rows = json::array();
  for (std::size_t k = 0; k < c.dts.size(); ++k) {
    const double dt = c.dts[k];
    RunOutputs out(c, *d, dir, "_" + std::to_string(k), report, {steps_of(c.T, dt)});
    Example1RunOptions opt;
    opt.run = run_options(c);
    opt.T = c.T;
    opt.flux_sides = c.flux_sides;
    opt.observers = {out.observer()};
    log << "example1 " << to_string(c.scheme) << " dt=" << dt << " ..." << std::flush;
    ErrorRow row = example1_run(d, ex, dt, opt);
    row.dt = dt;
    out.close();
    log << " u_f=" << row.u_f << " avg_it=" << row.average_iterations << '\n';
    report.table.rows.push_back(row);
    report.not_converged += out.not_converged();
    json r = {{"dt", dt}, {"average_iterations", row.average_iterations}, {"not_converged", out.not_converged()}};
    for (int i = 0; i < ErrorRow::n_norms; ++i) r[std::string("err_") + ErrorRow::norm_name(i)] = row.norm(i);
    rows.push_back(r);
  }
  results["rows"] = rows;
  const fs::path csv = dir / "convergence.csv";
  std::ofstream os = open_out(csv);
  write_convergence_csv(os, report.table);
  check_written(os, csv);
  report.files.push_back(csv);
}

void run_example2(const RunConfig& c, const fs::path& dir, RunReport& report, json& results, std::ostream& log) {
  Example2Setup setup;
  setup.nx = c.nx;
  setup.ny_fluid = c.ny_fluid;
  setup.ny_wall = c.ny_wall;
  setup.darcy = c.darcy;
  setup.params = c.params;
  setup.pulse = c.pulse;
  setup.honor_bjs = c.honor_bjs;
  auto [fluid, poro] = example2_meshes(setup);
  const auto d = make_discretization(std::move(fluid), std::move(poro), setup.darcy);
  results["mesh"] = mesh_metadata(c, *d);
  const double dt = c.dts.front();
  std::vector<int> vtk_steps;
  for (double t : c.slice_times) vtk_steps.push_back(steps_of(t, dt));
  if (vtk_steps.empty()) vtk_steps.push_back(steps_of(c.T, dt));
  RunOutputs out(c, *d, dir, "", report, vtk_steps);
  log << "example2 " << to_string(c.scheme) << " dt=" << dt << " steps=" << steps_of(c.T, dt) << " ..." << std::flush;
  const Example2Result res = example2_run(d, setup, dt, c.T, run_options(c), c.slice_times, {out.observer()});
  out.close();
  log << " done\n";
  report.not_converged += out.not_converged();
  results["run"] = summary_json(res.summary);
  json slices = json::array();
  for (const InterfaceSlice& s : res.slices) {
    const fs::path p = dir / ("slice_t" + compact(s.t) + ".csv");
    std::ofstream os = open_out(p);
    write_slice_csv(os, s);
    check_written(os, p);
    report.files.push_back(p);
    double peak = 0.0;
    for (double v : s.p_f) peak = std::max(peak, std::abs(v));
    slices.push_back({{"t", s.t}, {"file", p.filename().string()}, {"max_abs_p_f", peak}});
  }
  results["slices"] = slices;
}

void run_custom(const RunConfig& c, const fs::path& dir, RunReport& report, json& results, std::ostream& log) {
  auto [fluid, poro] = example1_meshes(c.n);
  const auto d = make_discretization(std::move(fluid), std::move(poro), c.darcy);
  results["mesh"] = mesh_metadata(c, *d);
  const double dt = c.dts.front();
  const SchemeContext ctx(d, example1_free_problem(c.params), dt);
  RunOutputs out(c, *d, dir, "", report, {steps_of(c.T, dt)});
  log << "custom free decay " << to_string(c.scheme) << " dt=" << dt << " ..." << std::flush;
  const RunSummary sum = run(ctx, example1_free_state(*d, c.params), c.T, run_options(c), {out.observer()});
  out.close();
  log << " E0=" << sum.E0 << " EN=" << sum.EN << '\n';
  report.not_converged += out.not_converged();
  results["run"] = summary_json(sum);
}

}  // namespace

RunReport run_command(const RunConfig& config, std::ostream& log) {
  validate(config);
  RunReport report;
  report.out_dir = resolve_output_dir(config.out_dir);
  std::error_code ec;
  fs::create_directories(report.out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + report.out_dir.string() + "': " + ec.message());

  const std::string config_text = to_config_text(config);
  const fs::path cfg = report.out_dir / "config.toml";
  {
    std::ofstream os = open_out(cfg);
    os << config_text;
    check_written(os, cfg);
  }
  report.files.push_back(cfg);

  json results;
  switch (config.experiment) {
    case ExperimentKind::Example1: run_example1(config, report.out_dir, report, results, log); break;
    case ExperimentKind::Example2: run_example2(config, report.out_dir, report, results, log); break;
    case ExperimentKind::Custom: run_custom(config, report.out_dir, report, results, log); break;
  }

  json summary = {{"experiment", to_string(config.experiment)},
                  {"scheme", to_string(config.scheme)},
                  {"config", config_text},
                  {"not_converged_steps", report.not_converged},
                  {"results", results}};
  json files = json::array();
  for (const fs::path& p : report.files) files.push_back(p.filename().string());
  summary["files"] = files;
  const fs::path sp = report.out_dir / "summary.json";
  std::ofstream os = open_out(sp);
  os << std::setprecision(17) << summary.dump(2) << '\n';
  check_written(os, sp);
  report.files.push_back(sp);
  if (report.not_converged > 0)
    log << "warning: " << report.not_converged << " iterative step(s) stopped at k_max without reaching eps\n";
  return report;
}

RunReport gamma_study(const RunConfig& config, const std::vector<double>& gammas, std::ostream& log) {
  if (config.experiment != ExperimentKind::Example1) throw ConfigError("experiment: the gamma study needs example1");
  if (gammas.empty()) throw ConfigError("values: at least one gamma is required");
  RunReport report;
  report.out_dir = resolve_output_dir(config.out_dir);
  std::error_code ec;
  fs::create_directories(report.out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + report.out_dir.string() + "': " + ec.message());

  std::ostringstream table;
  table << std::setprecision(17) << "gamma";
  for (int i = 0; i < ErrorRow::n_norms; ++i) table << ",rate_" << ErrorRow::norm_name(i);
  table << ",avg_iterations_last\n";
  for (double g : gammas) {
    RunConfig c = config;
    c.params.gamma_f = c.params.gamma_p = g;
    c.out_dir = (report.out_dir / ("gamma_" + compact(g))).string();
    log << "gamma = " << g << '\n';
    RunReport r = run_command(c, log);
    report.not_converged += r.not_converged;
    report.files.insert(report.files.end(), r.files.begin(), r.files.end());
    const auto rates = r.table.rates();
    table << g;
    for (int i = 0; i < ErrorRow::n_norms; ++i) {
      table << ',';
      if (!rates.empty()) table << rates.back()[i];
    }
    table << ',' << r.table.rows.back().average_iterations << '\n';
  }
  const fs::path p = report.out_dir / "gamma_rates.csv";
  std::ofstream os = open_out(p);
  os << table.str();
  check_written(os, p);
  report.files.push_back(p);
  return report;
}

}  // namespace fpsi
