#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "fpsi/biot.hpp"
#include "fpsi/interface.hpp"
#include "fpsi/stokes.hpp"

namespace fpsi {

enum class DarcyPair { RT0P0, RT1P1dc };
enum class SchemeKind { NonIterative, Iterative, Monolithic };

const char* to_string(SchemeKind k);
SchemeKind scheme_from_string(const std::string& s);

/// Meshes, finite element spaces and interface operators of one coupled problem.
struct Discretization {
  std::shared_ptr<const TriMesh> fluid_mesh;
  std::shared_ptr<const TriMesh> poro_mesh;
  std::unique_ptr<DofMap> fluid_velocity;  // VecP2c
  std::unique_ptr<DofMap> fluid_pressure;  // P1c
  std::unique_ptr<DofMap> displacement;    // VecP2c
  std::unique_ptr<DofMap> darcy_velocity;  // RT0 or RT1
  std::unique_ptr<DofMap> darcy_pressure;  // P0 or P1dc
  std::unique_ptr<LambdaSpace> lambda;
  InterfaceOperators ops;
  DarcyPair darcy_pair = DarcyPair::RT0P0;
};

/// Meshes must already carry boundary tags, with matching Interface edges.
std::shared_ptr<const Discretization> make_discretization(TriMesh fluid, TriMesh poro, DarcyPair pair);

struct CoupledProblem {
  PhysicalParams params;
  FluidBoundary fluid_bc;
  PoroBoundary poro_bc;
  StokesData stokes;
  BiotData biot;
};

struct CoupledState {
  double t = 0.0;
  Eigen::VectorXd u_f, p_f;
  Eigen::VectorXd eta, dt_eta;
  Eigen::VectorXd u_p, p_p;
  MuState mu;
};

CoupledState zero_state(const Discretization& d, double t = 0.0);

/// Global matrix of the fully coupled scheme over
/// [u_f, p_f, eta, u_p, p_p, mu_n, mu_t].
struct MonolithicSystem {
  SpMat matrix;
  std::vector<int> essential;
  EssentialConstraints constraints;
  std::shared_ptr<DirectSolver> solver;
  ConstraintRows rows;
  int off_pf = 0, off_eta = 0, off_q = 0, off_p = 0, off_mn = 0, off_mt = 0, size = 0;
};

/// Assembled operators for a fixed time step.
class SchemeContext {
 public:
  SchemeContext(std::shared_ptr<const Discretization> disc, CoupledProblem problem, double dt);

  const Discretization& disc() const { return *disc_; }
  const CoupledProblem& problem() const { return problem_; }
  const PhysicalParams& params() const { return problem_.params; }
  double dt() const { return dt_; }
  const StokesBlocks& stokes() const { return stokes_; }
  const BiotBlocks& biot() const { return biot_; }
  /// Built on first use; requires gamma_f == gamma_p.
  const MonolithicSystem& monolithic() const;

  // Unscaled operators for energies and norms.
  const SpMat& fluid_mass() const { return fluid_mass_; }

 private:
  std::shared_ptr<const Discretization> disc_;
  CoupledProblem problem_;
  double dt_;
  StokesBlocks stokes_;
  BiotBlocks biot_;
  SpMat fluid_mass_;
  mutable std::unique_ptr<MonolithicSystem> mono_;
};

CoupledState step_noniterative(const CoupledState& s, const SchemeContext& ctx);

struct IterationControl {
  double eps = 1e-8;   // on ||u_f^{k+1} . n - u_f^k . n|| over the interface
  int k_max = 100;
  bool fixed = false;  // run exactly k_max iterations
  std::function<void(int k, double change)> on_iteration;
};

struct IterativeResult {
  CoupledState state;
  int iterations = 0;
  bool converged = false;
  double last_change = 0.0;
};

IterativeResult step_iterative(const CoupledState& s, const SchemeContext& ctx, const IterationControl& ctl);

CoupledState step_monolithic(const CoupledState& s, const SchemeContext& ctx);

struct EnergyReport {
  double E = 0.0;  // stored energy of `state`
  double D = 0.0;  // dissipation of `state`
  double S = 0.0;  // numerical dissipation of the step prev -> state
};

/// Stored energy, including dt/(4 gamma)(|mu_n|^2 + |mu_t|^2) when `with_mu`.
double stored_energy(const SchemeContext& ctx, const CoupledState& s, bool with_mu = true);
EnergyReport energy_diagnostics(const SchemeContext& ctx, const CoupledState& state, const CoupledState& prev,
                                bool with_mu = true);

/// Both sides of the Stokes energy identity of one split step (zero data):
///   rho_f/dt (u - u^n, u) + a_f(u, u)  and
///   1/(4 gamma) (|mu_n|^2 - |mu_n - 2 gamma u.n|^2 + |mu_t|^2 - |mu_t - 2 gamma u.t|^2).
std::pair<double, double> stokes_energy_identity(const SchemeContext& ctx, const CoupledState& prev,
                                                 const Eigen::VectorXd& u_new);

/// L2 norm over the interface of the weak velocity mismatch, normal and tangential combined.
double interface_residual(const SchemeContext& ctx, const CoupledState& s);

struct StepRecord {
  int step = 0;
  double t = 0.0;
  int iterations = 0;
  bool converged = true;
  EnergyReport energy;
  double interface_residual = 0.0;
};

using StepObserver = std::function<void(const CoupledState&, const StepRecord&)>;

struct RunSummary {
  int steps = 0;
  double average_iterations = 0.0;
  int not_converged = 0;
  double E0 = 0.0, EN = 0.0, sum_D = 0.0, sum_S = 0.0;  // E includes mu terms except for the monolithic scheme
  CoupledState final_state;
};

struct RunOptions {
  SchemeKind scheme = SchemeKind::NonIterative;
  IterationControl iteration;
  bool energies = true;  // needs gamma_f == gamma_p
};

/// Advances N = round(T / dt) steps. Observers see the initial state with step 0.
RunSummary run(const SchemeContext& ctx, const CoupledState& ic, double T, const RunOptions& opt,
               const std::vector<StepObserver>& observers = {});

/// One JSON object per line: step, t, iterations, converged, E, D, S, interface_residual.
void write_jsonl(std::ostream& os, const StepRecord& r);

}  // namespace fpsi
