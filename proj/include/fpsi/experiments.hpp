#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fpsi/schemes.hpp"

namespace fpsi {

using Vec2 = std::array<double, 2>;
using Tensor2 = std::array<Vec2, 2>;  // t[i][j] = d_j of component i for gradients

/// Closed-form solution on (0,1)x(0,1) (fluid) over (0,1)x(-1,0) (structure):
///   u_f = pi cos(pi t) (-3x + cos y, y + 1)
///   p_f = e^t sin(pi x) cos(pi y / 2) + 2 pi cos(pi t)
///   p_p = e^t sin(pi x) cos(pi y / 2),  u_p = -K grad p_p / mu_f
///   eta = sin(pi t) (-3x + cos y, y + 1)
/// Forcings are derived for general coefficients; the interface conditions
/// hold for the unit coefficients of the convergence test.
class ManufacturedSolution {
 public:
  explicit ManufacturedSolution(PhysicalParams params = {});
  const PhysicalParams& params() const { return p_; }

  Vec2 u_f(double t, Point2 x) const;
  Tensor2 grad_u_f(double t, Point2 x) const;
  Vec2 dt_u_f(double t, Point2 x) const;
  double p_f(double t, Point2 x) const;
  Vec2 grad_p_f(double t, Point2 x) const;

  Vec2 eta(double t, Point2 x) const;
  Tensor2 grad_eta(double t, Point2 x) const;
  Vec2 dt_eta(double t, Point2 x) const;
  Vec2 dtt_eta(double t, Point2 x) const;
  double p_p(double t, Point2 x) const;
  Vec2 grad_p_p(double t, Point2 x) const;
  double dt_p_p(double t, Point2 x) const;
  Vec2 u_p(double t, Point2 x) const;
  double div_u_p(double t, Point2 x) const;

  Tensor2 sigma_f(double t, Point2 x) const;
  Tensor2 sigma_p(double t, Point2 x) const;

  Vec2 f_f(double t, Point2 x) const;
  double q_f(double t, Point2 x) const;
  Vec2 f_p(double t, Point2 x) const;
  double q_p(double t, Point2 x) const;

  /// Robin data for mu on the interface y = 0 (n_p = (0, 1), tau_p = (-1, 0)).
  double robin_n(double t, Point2 x) const;
  double robin_t(double t, Point2 x) const;

 private:
  PhysicalParams p_;
};

struct Example1Setup {
  int n = 32;  // cells per unit length
  DarcyPair darcy = DarcyPair::RT1P1dc;
  PhysicalParams params;  // defaults: all coefficients 1, gamma_f = gamma_p = 1
  bool flux_sides = false;  // impose u_p . n on the structure sides instead of p_p
};

/// Tagged meshes of the convergence test.
std::pair<TriMesh, TriMesh> example1_meshes(int n);
/// Pore pressure is prescribed on the bottom and, unless `flux_sides`, on the sides.
CoupledProblem example1_problem(const ManufacturedSolution& ex, bool flux_sides = false);
/// Interpolated exact fields at t0, dt_eta from the exact structure velocity,
/// mu from the projected Robin data.
CoupledState example1_initial_state(const Discretization& d, const ManufacturedSolution& ex, double t0 = 0.0);

/// Example-1 boundary roles with zero forcing and zero boundary data.
CoupledProblem example1_free_problem(const PhysicalParams& params);
/// Smooth nonzero state compatible with the homogeneous essential conditions
/// of `example1_free_problem`; mu from the structure traces.
CoupledState example1_free_state(const Discretization& d, const PhysicalParams& params);

/// Errors in the norms of the convergence tables.
struct ErrorRow {
  double dt = 0.0;
  double u_f = 0.0;     // Linf(H1)
  double p_f = 0.0;     // L2(L2)
  double u_p = 0.0;     // L2(Hdiv)
  double p_p = 0.0;     // Linf(L2)
  double eta = 0.0;     // Linf(H1)
  double dt_eta = 0.0;  // Linf(L2)
  double mu = 0.0;      // Linf(L2(interface))
  double average_iterations = 0.0;

  static constexpr int n_norms = 7;
  double norm(int i) const;
  static const char* norm_name(int i);
};

struct FieldError {
  double l2 = 0.0;
  double h1_semi = 0.0;
  double div = 0.0;
};

/// Cellwise quadrature errors of a discrete field against closed forms.
FieldError field_error(const DofMap& V, const Eigen::VectorXd& x, const std::function<Vec2(Point2)>& value,
                       const std::function<Tensor2(Point2)>& grad = {}, const std::function<double(Point2)>& div = {});

/// Streams time levels n = 1..N into the table norms.
class ErrorAccumulator {
 public:
  ErrorAccumulator(const Discretization& d, const ManufacturedSolution& ex, double dt);
  void add(const CoupledState& s);
  ErrorRow result() const;

 private:
  const Discretization& d_;
  const ManufacturedSolution& ex_;
  double dt_;
  ErrorRow acc_;  // Linf entries hold maxima, L2 entries hold sums of squares
};

struct Example1RunOptions {
  RunOptions run;
  double T = 1.0;
  bool flux_sides = false;
  std::vector<StepObserver> observers;
};

ErrorRow example1_run(const std::shared_ptr<const Discretization>& d, const ManufacturedSolution& ex, double dt,
                      const Example1RunOptions& opt);

struct ConvergenceTable {
  std::vector<ErrorRow> rows;
  /// rates[k][i] = log2(e_i(dt_{k}) / e_i(dt_{k+1})) for successive rows.
  std::vector<std::array<double, ErrorRow::n_norms>> rates() const;
};

ConvergenceTable convergence_study(const Example1Setup& setup, const std::vector<double>& dts, const RunOptions& run,
                                   double T = 1.0);
/// CSV with one row per dt: dt, seven errors, six rates (empty on the first row), average iterations.
void write_convergence_csv(std::ostream& os, const ConvergenceTable& table);

/// Inflow pressure pulse P_max/2 (1 - cos(2 pi t / T_max)) for t <= T_max, then 0.
struct PulseBC {
  double P_max = 13334.0;
  double T_max = 0.003;
  double operator()(double t) const;
};

/// Wall and flow coefficients of the blood-flow benchmark.
PhysicalParams example2_params();

struct Example2Setup {
  int nx = 120;       // cells along the vessel
  int ny_fluid = 10;  // cells across the fluid half-channel
  int ny_wall = 2;    // cells across the wall
  DarcyPair darcy = DarcyPair::RT0P0;
  PhysicalParams params = example2_params();
  PulseBC pulse;
  bool honor_bjs = false;  // use gamma_BJS from alpha_BJS instead of 0
};

std::pair<TriMesh, TriMesh> example2_meshes(const Example2Setup& s);
CoupledProblem example2_problem(const Example2Setup& s);

/// Interface samples at the trace-space nodes, ordered by arc length.
struct InterfaceSlice {
  double t = 0.0;
  std::vector<double> x, p_f, u_f_y, u_p_y, eta_y;
};

InterfaceSlice sample_interface(const Discretization& d, const CoupledState& s);
void write_slice_csv(std::ostream& os, const InterfaceSlice& slice);

struct Example2Result {
  std::vector<InterfaceSlice> slices;
  RunSummary summary;
};

/// Runs from rest and records slices at the requested times (matched to the nearest step).
Example2Result example2_run(const std::shared_ptr<const Discretization>& d, const Example2Setup& setup, double dt,
                            double T, const RunOptions& run, const std::vector<double>& slice_times,
                            std::vector<StepObserver> observers = {});

/// Legacy VTK snapshots with point data (P2 fields at vertices, cell data for P0/P1dc).
void write_fluid_vtk(std::ostream& os, const Discretization& d, const CoupledState& s);
void write_poro_vtk(std::ostream& os, const Discretization& d, const CoupledState& s);

}  // namespace fpsi
