// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.
//
// Exit status is 0 when every failing criterion is listed in --known-red, so a
// documented shortfall stays visible as FAIL without breaking the test run,
// while any new failure does.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "fpsi/experiments.hpp"
#include "fpsi/fem/assembly.hpp"

using namespace fpsi;

namespace {

const std::vector<double> kDts{0.2, 0.1, 0.05, 0.025, 0.0125};
constexpr int kN = 32;

// Reference errors of the non-iterative scheme on this test, h = 1/32, gamma = 1,
// in ErrorRow::norm order.
const double kReferenceNonIterative[5][ErrorRow::n_norms] = {
    {1.663e+00, 1.706e+00, 1.800e+00, 3.112e-01, 1.966e+00, 1.578e+00, 2.369e+00},
    {9.071e-01, 8.999e-01, 1.046e+00, 1.827e-01, 1.183e+00, 8.996e-01, 1.311e+00},
    {4.768e-01, 4.640e-01, 5.825e-01, 1.023e-01, 6.675e-01, 4.808e-01, 6.857e-01},
    {2.449e-01, 2.360e-01, 3.113e-01, 5.497e-02, 3.589e-01, 2.491e-01, 3.479e-01},
    {1.247e-01, 1.191e-01, 1.617e-01, 2.855e-02, 1.868e-01, 1.270e-01, 1.745e-01}};
// Average iterations to eps = 1e-5 (k_max = 100) at gamma = 1 along kDts, and at gamma = 0.1, dt = 0.05.
const double kReferenceIterations[5] = {96.6, 89.2, 76.5, 65.45, 55.1};
constexpr double kReferenceIterationsGammaTenth = 17.05;

std::string fmt(double x, int digits = 3) {
  std::ostringstream os;
  os << std::setprecision(digits) << x;
  return os.str();
}

class Harness {
 public:
  Harness(std::set<std::string> only, std::set<std::string> known_red, std::string property_tests,
          std::filesystem::path out)
      : only_(std::move(only)),
        known_red_(std::move(known_red)),
        property_tests_(std::move(property_tests)),
        out_(std::move(out)) {
    if (!out_.empty()) std::filesystem::create_directories(out_);
  }

  bool wants(const std::string& group) const { return only_.empty() || only_.count(group); }

  void report(const std::string& id, bool pass, const std::string& detail) {
    std::cout << (pass ? "PASS " : "FAIL ") << id << "  " << detail;
    if (!pass && known_red_.count(id)) std::cout << "  [known red]";
    if (pass && known_red_.count(id)) std::cout << "  [listed as known red but passes]";
    std::cout << std::endl;
    if (pass) {
      ++passed_;
    } else if (known_red_.count(id)) {
      ++expected_failures_;
    } else {
      unexpected_.push_back(id);
    }
  }

  void info(const std::string& text) const { std::cout << "     " << text << std::endl; }

  int finish() const {
    std::cout << "SUMMARY " << passed_ << " passed, " << expected_failures_ << " known red, " << unexpected_.size()
              << " unexpected failure(s)";
    for (const auto& id : unexpected_) std::cout << ' ' << id;
    std::cout << std::endl;
    return unexpected_.empty() ? 0 : 1;
  }

  // Cached Example 1 series: key = scheme tag + gamma.
  const ConvergenceTable& table(const std::string& tag, double gamma) {
    const std::string key = tag + "@" + fmt(gamma, 6);
    if (auto it = tables_.find(key); it != tables_.end()) return it->second;
    Example1Setup setup;
    setup.n = kN;
    setup.params.gamma_f = setup.params.gamma_p = gamma;
    RunOptions run;
    run.energies = false;
    if (tag == "noniterative") {
      run.scheme = SchemeKind::NonIterative;
    } else if (tag == "monolithic") {
      run.scheme = SchemeKind::Monolithic;
    } else if (tag == "iterative") {
      run.scheme = SchemeKind::Iterative;
      run.iteration.eps = 1e-5;
      run.iteration.k_max = 100;
    } else if (tag == "iter10") {
      run.scheme = SchemeKind::Iterative;
      run.iteration.k_max = 10;
      run.iteration.fixed = true;
    }
    const auto t0 = std::chrono::steady_clock::now();
    ConvergenceTable t = convergence_study(setup, kDts, run);
    info("[" + key + "] series computed in " +
         fmt(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 3) + " s");
    if (!out_.empty()) {
      std::ofstream os(out_ / ("convergence_" + tag + "_gamma" + fmt(gamma, 6) + ".csv"));
      write_convergence_csv(os, t);
    }
    return tables_.emplace(key, std::move(t)).first->second;
  }

  const std::string& property_tests() const { return property_tests_; }
  const std::filesystem::path& out() const { return out_; }

 private:
  std::set<std::string> only_, known_red_;
  std::string property_tests_;
  std::filesystem::path out_;
  std::map<std::string, ConvergenceTable> tables_;
  int passed_ = 0, expected_failures_ = 0;
  std::vector<std::string> unexpected_;
};

std::string rate_list(const std::array<double, ErrorRow::n_norms>& r, const std::vector<int>& which) {
  std::string s;
  for (int i : which) s += std::string(s.empty() ? "" : " ") + ErrorRow::norm_name(i) + "=" + fmt(r[i]);
  return s;
}

const std::vector<int> kAllNorms{0, 1, 2, 3, 4, 5, 6};
const std::vector<int> kPlottedNorms{0, 2, 4};  // u_f, u_p, eta

double min_of(const std::array<double, ErrorRow::n_norms>& r, const std::vector<int>& which) {
  double m = 1e300;
  for (int i : which) m = std::min(m, r[i]);
  return m;
}

void temporal_convergence(Harness& h) {
  const ConvergenceTable& t = h.table("noniterative", 1.0);
  const auto rates = t.rates();
  const auto& last = rates.back();
  bool ok = min_of(last, kAllNorms) >= 0.85;
  // Trending toward one: the last pair is not worse than the first by more than noise.
  for (int i : kAllNorms) ok &= last[i] >= std::min(0.95, rates.front()[i] - 0.02);
  double worst = 1.0;
  for (std::size_t k = 0; k < t.rows.size(); ++k)
    for (int i : kAllNorms) {
      const double ratio = t.rows[k].norm(i) / kReferenceNonIterative[k][i];
      worst = std::max({worst, ratio, 1.0 / ratio});
    }
  ok &= worst <= 2.0;
  h.report("C1", ok,
           "final-pair rates " + rate_list(last, kAllNorms) + "; largest magnitude ratio to reference " + fmt(worst));
}

void iterative_matches_monolithic(Harness& h) {
  auto [fluid, poro] = example1_meshes(kN);
  const auto d = make_discretization(std::move(fluid), std::move(poro), DarcyPair::RT1P1dc);
  const ManufacturedSolution ex;
  const double dt = 0.05;
  const SchemeContext ctx(d, example1_problem(ex), dt);
  const PhysicalParams& p = ex.params();

  const SpMat M_uf = ctx.fluid_mass();
  const SpMat M_pf = assemble_form({FormKind::ScalarMass}, *d->fluid_pressure, *d->fluid_pressure, p);
  const SpMat M_up = assemble_form({FormKind::VectorMass}, *d->darcy_velocity, *d->darcy_velocity, p);
  const SpMat& M_eta = ctx.biot().mass_eta;
  const SpMat& M_pp = ctx.biot().mass_p;
  const SpMat& M_mu = d->lambda->mass();
  const auto l2 = [](const SpMat& M, const Eigen::VectorXd& x) { return std::sqrt(std::max(0.0, x.dot(M * x))); };
  using Field = std::pair<const SpMat*, const Eigen::VectorXd*>;
  const auto fields = [&](const CoupledState& s) {
    return std::array<Field, 8>{Field{&M_uf, &s.u_f},    Field{&M_pf, &s.p_f},  Field{&M_eta, &s.eta},
                                Field{&M_eta, &s.dt_eta}, Field{&M_up, &s.u_p},  Field{&M_pp, &s.p_p},
                                Field{&M_mu, &s.mu.n},    Field{&M_mu, &s.mu.tau}};
  };
  const char* names[] = {"u_f", "p_f", "eta", "dt_eta", "u_p", "p_p", "mu_n", "mu_tau"};

  IterationControl ctl;
  ctl.eps = 1e-10;
  ctl.k_max = 500;
  CoupledState a = example1_initial_state(*d, ex), b = a;
  std::vector<std::array<double, 8>> diff, size;
  int unconverged = 0, max_it = 0;
  for (int step = 0; step < 20; ++step) {
    const IterativeResult it = step_iterative(a, ctx, ctl);
    a = it.state;
    b = step_monolithic(b, ctx);
    unconverged += !it.converged;
    max_it = std::max(max_it, it.iterations);
    const auto fa = fields(a), fb = fields(b);
    std::array<double, 8> dd{}, ss{};
    for (int f = 0; f < 8; ++f) {
      dd[f] = l2(*fb[f].first, *fa[f].second - *fb[f].second);
      ss[f] = l2(*fb[f].first, *fb[f].second);
    }
    diff.push_back(dd);
    size.push_back(ss);
  }
  // Each difference is measured against the largest norm of that field over the
  // run: the tangential Robin data pass through zero mid-run, where a per-step
  // ratio would divide by nearly nothing.
  double worst = 0.0, worst_step_rel = 0.0;
  std::string worst_field;
  for (int f = 0; f < 8; ++f) {
    double scale = 0.0;
    for (const auto& s : size) scale = std::max(scale, s[f]);
    for (std::size_t k = 0; k < diff.size(); ++k) {
      const double r = diff[k][f] / scale;
      if (r > worst) {
        worst = r;
        worst_field = names[f];
      }
      worst_step_rel = std::max(worst_step_rel, diff[k][f] / std::max(size[k][f], 1e-300));
    }
  }
  h.report("C2", worst <= 1e-6 && unconverged == 0,
           "max relative L2 difference " + fmt(worst) + " (" + worst_field + "), " + std::to_string(unconverged) +
               " unconverged steps, up to " + std::to_string(max_it) + " iterations per step");
  h.info("per-step ratio without trajectory scaling peaks at " + fmt(worst_step_rel));
}

void energy_stability(Harness& h, SchemeKind scheme, const std::string& id) {
  auto [fluid, poro] = example1_meshes(8);
  const auto d = make_discretization(std::move(fluid), std::move(poro), DarcyPair::RT1P1dc);
  bool ok = true;
  double tightest = 1e300;
  for (double gamma : {0.1, 1.0, 10.0}) {
    for (double dt : {0.1, 0.01}) {
      PhysicalParams p;
      p.gamma_f = p.gamma_p = gamma;
      const SchemeContext ctx(d, example1_free_problem(p), dt);
      RunOptions opt;
      opt.scheme = scheme;
      const RunSummary s = run(ctx, example1_free_state(*d, p), 50 * dt, opt);
      const double lhs = s.EN + s.sum_D + s.sum_S;
      const bool pass = s.E0 > 0.0 && lhs <= s.E0 * (1.0 + 1e-10);
      ok &= pass;
      tightest = std::min(tightest, (s.E0 - lhs) / s.E0);
      if (!pass) h.info("gamma=" + fmt(gamma) + " dt=" + fmt(dt) + ": E0=" + fmt(s.E0, 10) + " lhs=" + fmt(lhs, 10));
    }
  }
  h.report(id, ok, "E^N + sum D + sum S <= E^0 in all 6 cases; smallest relative slack " + fmt(tightest));
}

void iteration_trends(Harness& h) {
  const ConvergenceTable& t = h.table("iterative", 1.0);
  bool decreasing = true;
  std::string counts;
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    counts += (k ? " " : "") + fmt(t.rows[k].average_iterations, 4);
    if (k > 0) decreasing &= t.rows[k].average_iterations < t.rows[k - 1].average_iterations;
  }
  auto [fluid, poro] = example1_meshes(kN);
  const auto d = make_discretization(std::move(fluid), std::move(poro), DarcyPair::RT1P1dc);
  PhysicalParams p;
  p.gamma_f = p.gamma_p = 0.1;
  Example1RunOptions opt;
  opt.run.scheme = SchemeKind::Iterative;
  opt.run.iteration.eps = 1e-5;
  opt.run.iteration.k_max = 100;
  opt.run.energies = false;
  const double small_gamma = example1_run(d, ManufacturedSolution(p), 0.05, opt).average_iterations;
  const double unit_gamma = t.rows[2].average_iterations;
  h.report("C5", decreasing && small_gamma < unit_gamma,
           "gamma=1 averages " + counts + "; at dt=0.05 gamma=0.1 needs " + fmt(small_gamma, 4) + " vs " +
               fmt(unit_gamma, 4));
  std::string within;
  for (std::size_t k = 0; k < t.rows.size(); ++k)
    within += (k ? " " : "") + fmt(t.rows[k].average_iterations / kReferenceIterations[k], 3);
  h.info("ratio to reference counts: " + within + "; gamma=0.1: " + fmt(small_gamma / kReferenceIterationsGammaTenth, 3) +
         " (informational, +-30% band)");
}

void fixed_iterations(Harness& h) {
  const ConvergenceTable& split = h.table("noniterative", 1.0);
  const ConvergenceTable& mono = h.table("monolithic", 1.0);
  const ConvergenceTable& ten = h.table("iter10", 1.0);
  bool ok = true;
  std::string detail;
  for (std::size_t k = 0; k < kDts.size(); ++k) {
    const double a = split.rows[k].u_f, b = mono.rows[k].u_f, c = ten.rows[k].u_f;
    ok &= c >= 0.5 * std::min(a, b) && c <= 2.0 * std::max(a, b);
    detail += (k ? "; " : "") + fmt(b, 4) + " / " + fmt(c, 4) + " / " + fmt(a, 4);
  }
  h.report("C6", ok, "u_f Linf(H1) monolithic / 10 iterations / non-iterative per dt (factor-2 band): " + detail);
}

void gamma_robustness(Harness& h) {
  bool a_ok = true;
  for (double g : {0.01, 0.1, 1.0, 10.0}) {
    const auto r = h.table("noniterative", g).rates().back();
    const bool pass = min_of(r, kPlottedNorms) >= 0.85;
    a_ok &= pass;
    h.info("non-iterative gamma=" + fmt(g) + ": " + rate_list(r, kPlottedNorms) + (pass ? "" : "  <- below 0.85"));
  }
  h.report("C7a", a_ok, "non-iterative final-pair rates of u_f, u_p, eta >= 0.85 for gamma in {0.01, 0.1, 1, 10}");

  const auto low = h.table("noniterative", 0.001).rates().back();
  h.report("C7b", min_of(low, kPlottedNorms) <= 0.7,
           "non-iterative gamma=0.001 degrades: " + rate_list(low, kPlottedNorms));

  bool c_ok = true;
  for (double g : {0.001, 100.0}) {
    const auto r = h.table("iter10", g).rates().back();
    const bool pass = min_of(r, kPlottedNorms) >= 0.85;
    c_ok &= pass;
    h.info("10 iterations gamma=" + fmt(g) + ": " + rate_list(r, kPlottedNorms) + (pass ? "" : "  <- below 0.85"));
  }
  h.report("C7c", c_ok, "10 iterations per step restore rates >= 0.85 at gamma in {0.001, 100}");
}

double slice_difference(const InterfaceSlice& a, const InterfaceSlice& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.p_f.size(); ++i) {
    num += (a.p_f[i] - b.p_f[i]) * (a.p_f[i] - b.p_f[i]);
    den += b.p_f[i] * b.p_f[i];
  }
  return std::sqrt(num / den);
}

void blood_flow(Harness& h) {
  const Example2Setup setup;
  auto [fluid, poro] = example2_meshes(setup);
  const auto d = make_discretization(std::move(fluid), std::move(poro), setup.darcy);
  const double dt = 1e-4, T = 0.021;
  const std::vector<double> times{0.007, 0.014, 0.021};

  {
    Example2Setup rest = setup;
    rest.pulse.P_max = 0.0;
    double largest = 0.0;
    const StepObserver watch = [&](const CoupledState& s, const StepRecord&) {
      for (const Eigen::VectorXd* v : {&s.u_f, &s.p_f, &s.eta, &s.dt_eta, &s.u_p, &s.p_p, &s.mu.n, &s.mu.tau})
        largest = std::max(largest, v->cwiseAbs().maxCoeff());
    };
    bool ok = true;
    for (SchemeKind k : {SchemeKind::NonIterative, SchemeKind::Iterative, SchemeKind::Monolithic}) {
      RunOptions opt;
      opt.scheme = k;
      opt.energies = false;
      largest = 0.0;
      example2_run(d, rest, dt, T, opt, {}, {watch});
      ok &= largest == 0.0;
    }
    h.report("C8a", ok, "zero pulse keeps every field of all three schemes identically zero");
  }

  std::map<SchemeKind, Example2Result> res;
  for (SchemeKind k : {SchemeKind::NonIterative, SchemeKind::Iterative, SchemeKind::Monolithic}) {
    RunOptions opt;
    opt.scheme = k;
    opt.iteration.eps = 1e-5;
    opt.iteration.k_max = 1000;
    opt.energies = false;
    res[k] = example2_run(d, setup, dt, T, opt, times);
    if (!h.out().empty()) {
      for (const auto& s : res[k].slices) {
        std::ofstream os(h.out() / ("slice_" + std::string(to_string(k)) + "_t" + fmt(s.t) + ".csv"));
        write_slice_csv(os, s);
      }
    }
  }
  const auto peak = [](const InterfaceSlice& s) { return *std::max_element(s.p_f.begin(), s.p_f.end()); };
  const double P = setup.pulse.P_max;
  const double p7 = peak(res[SchemeKind::NonIterative].slices.at(0));
  h.report("C8b", p7 >= 0.5 * P && p7 <= 1.5 * P,
           "peak interface fluid pressure at t=0.007 is " + fmt(p7 / P) + " P_max (non-iterative; monolithic " +
               fmt(peak(res[SchemeKind::Monolithic].slices.at(0)) / P) + " P_max)");
  const double dc = slice_difference(res[SchemeKind::NonIterative].slices.at(2), res[SchemeKind::Monolithic].slices.at(2));
  h.report("C8c", dc <= 0.10, "non-iterative vs monolithic p_f slice at t=0.021 differ by " + fmt(100 * dc) + "%");
  const auto& it = res[SchemeKind::Iterative];
  double dd = 0.0;
  for (int k = 0; k < 3; ++k)
    dd = std::max(dd, slice_difference(it.slices.at(k), res[SchemeKind::Monolithic].slices.at(k)));
  h.report("C8d", dd <= 1e-3 && it.summary.not_converged == 0,
           "iterative vs monolithic p_f slices differ by at most " + fmt(100 * dd) + "% (average " +
               fmt(it.summary.average_iterations) + " iterations, " + std::to_string(it.summary.not_converged) +
               " unconverged)");
}

void property_suites(Harness& h) {
  if (h.property_tests().empty()) {
    h.report("C9", false, "no property test binary given (--property-tests)");
    return;
  }
  const std::string filter =
      "Quadrature.*:Basis.*:Assembly.*:DofMap.*:*RTProperty*:LambdaSpace.*:UpdateMu.*:ConstraintRows.*:"
      "Monolithic.*:BiotBlocks.*:StokesBlocks.*";
  const std::string cmd = "\"" + h.property_tests() + "\" --gtest_brief=1 --gtest_filter='" + filter + "' > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  h.report("C9", status == 0,
           "quadrature, mass, RT continuity and divergence, projection, mu update and constraint-residual suites " +
               std::string(status == 0 ? "pass" : "report failures"));
}

std::set<std::string> split(const std::string& s) {
  std::set<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.insert(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string only, known_red, property_tests, out;
  app.add_option("--only", only, "comma-separated groups: C1,...,C9 (C7 and C8 cover their parts)");
  app.add_option("--known-red", known_red, "comma-separated criterion ids expected to fail");
  app.add_option("--property-tests", property_tests, "path of the unit test binary");
  app.add_option("--out", out, "directory for the computed tables and slices");
  CLI11_PARSE(app, argc, argv);

  Harness h(split(only), split(known_red), property_tests, out);
  const auto timed = [&](const std::string& group, auto&& fn) {
    if (!h.wants(group)) return;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn();
    } catch (const std::exception& e) {
      h.report(group, false, std::string("threw: ") + e.what());
    }
    h.info(group + " took " +
           fmt(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 3) + " s");
  };
  timed("C9", [&] { property_suites(h); });
  timed("C3", [&] { energy_stability(h, SchemeKind::NonIterative, "C3"); });
  timed("C4", [&] { energy_stability(h, SchemeKind::Monolithic, "C4"); });
  timed("C8", [&] { blood_flow(h); });
  timed("C1", [&] { temporal_convergence(h); });
  timed("C6", [&] { fixed_iterations(h); });
  timed("C7", [&] { gamma_robustness(h); });
  timed("C5", [&] { iteration_trends(h); });
  timed("C2", [&] { iterative_matches_monolithic(h); });
  return h.finish();
}
