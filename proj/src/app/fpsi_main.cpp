// Command-line front end: run one configured experiment or a study.

#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "fpsi/cli_io.hpp"

namespace {

// Flags that map onto config keys; unset flags leave the file value alone.
struct CommonFlags {
  std::string config_path;
  std::string experiment, scheme, darcy, out;
  std::optional<double> dt, T, gamma, eps;
  std::optional<int> n, k_max;
  std::optional<bool> vtk, mu;
  std::vector<std::string> sets;
  bool dry_run = false;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config_path, "config file (TOML subset)")->check(CLI::ExistingFile);
    app->add_option("--experiment", experiment, "example1 | example2 | custom");
    app->add_option("--scheme", scheme, "noniterative | iterative | monolithic");
    app->add_option("--dt", dt, "time step (replaces dts)");
    app->add_option("--T", T, "final time");
    app->add_option("--n", n, "mesh.n: cells per unit length");
    app->add_option("--darcy", darcy, "mesh.darcy: RT0 | RT1");
    app->add_option("--gamma", gamma, "params.gamma: sets gamma_f and gamma_p");
    app->add_option("--eps", eps, "iteration.eps");
    app->add_option("--k-max", k_max, "iteration.k_max");
    app->add_option("--out", out, "output.dir (relative paths go under $FPSI_OUTPUT_ROOT)");
    app->add_option("--vtk", vtk, "output.vtk");
    app->add_option("--mu", mu, "output.mu");
    app->add_option("--set", sets, "any config key: section.key=value (repeatable)");
    app->add_flag("--dry-run", dry_run, "print the resolved config and exit");
  }

  fpsi::ConfigOverrides overrides() const {
    fpsi::ConfigOverrides o;
    const auto num = [](double x) {
      std::ostringstream os;
      os.precision(17);
      os << x;
      return os.str();
    };
    if (!experiment.empty()) o.emplace_back("experiment", experiment);
    if (!scheme.empty()) o.emplace_back("scheme", scheme);
    if (dt) o.emplace_back("dt", num(*dt));
    if (T) o.emplace_back("T", num(*T));
    if (n) o.emplace_back("mesh.n", std::to_string(*n));
    if (!darcy.empty()) o.emplace_back("mesh.darcy", darcy);
    if (gamma) o.emplace_back("params.gamma", num(*gamma));
    if (eps) o.emplace_back("iteration.eps", num(*eps));
    if (k_max) o.emplace_back("iteration.k_max", std::to_string(*k_max));
    if (!out.empty()) o.emplace_back("output.dir", out);
    if (vtk) o.emplace_back("output.vtk", *vtk ? "true" : "false");
    if (mu) o.emplace_back("output.mu", *mu ? "true" : "false");
    for (const std::string& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw fpsi::ConfigError("--set expects key=value, got '" + s + "'");
      o.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    return o;
  }

  fpsi::RunConfig resolve(fpsi::ConfigOverrides extra = {}) const {
    fpsi::ConfigOverrides o = overrides();
    o.insert(o.end(), extra.begin(), extra.end());
    return config_path.empty() ? fpsi::parse_config("", o) : fpsi::load_config(config_path, o);
  }
};

std::string as_array(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << ']';
  return os.str();
}

void report(const fpsi::RunReport& r) {
  std::cout << "wrote " << r.files.size() << " file(s) to " << r.out_dir.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partitioned and monolithic Stokes-Biot solver"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "run one configured experiment");
  run_flags.attach(run);

  CLI::App* study = app.add_subcommand("study", "parameter studies on the manufactured-solution test");
  study->require_subcommand(1);

  CommonFlags conv_flags;
  std::vector<double> conv_dts{0.2, 0.1, 0.05, 0.025, 0.0125};
  CLI::App* conv = study->add_subcommand("convergence", "error table over a series of time steps");
  conv_flags.attach(conv);
  conv->add_option("--dts", conv_dts, "time steps")->delimiter(',');

  CommonFlags gamma_flags;
  std::vector<double> gammas{0.001, 0.01, 0.1, 1, 10, 100};
  std::vector<double> gamma_dts{0.2, 0.1, 0.05, 0.025, 0.0125};
  CLI::App* gam = study->add_subcommand("gamma", "convergence rates for each Robin parameter");
  gamma_flags.attach(gam);
  gam->add_option("--values", gammas, "gamma values")->delimiter(',');
  gam->add_option("--dts", gamma_dts, "time steps")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const fpsi::RunConfig c = run_flags.resolve();
      if (run_flags.dry_run) {
        std::cout << fpsi::to_config_text(c);
        return 0;
      }
      const fpsi::RunReport r = fpsi::run_command(c, std::cerr);
      report(r);
      return 0;
    }
    if (conv->parsed()) {
      const fpsi::RunConfig c =
          conv_flags.resolve({{"experiment", "example1"}, {"dts", as_array(conv_dts)}});
      if (conv_flags.dry_run) {
        std::cout << fpsi::to_config_text(c);
        return 0;
      }
      const fpsi::RunReport r = fpsi::run_command(c, std::cerr);
      report(r);
      return 0;
    }
    if (gam->parsed()) {
      const fpsi::RunConfig c =
          gamma_flags.resolve({{"experiment", "example1"}, {"dts", as_array(gamma_dts)}});
      if (gamma_flags.dry_run) {
        std::cout << fpsi::to_config_text(c) << "# gamma values: " << as_array(gammas) << '\n';
        return 0;
      }
      const fpsi::RunReport r = fpsi::gamma_study(c, gammas, std::cerr);
      report(r);
      return 0;
    }
  } catch (const fpsi::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
