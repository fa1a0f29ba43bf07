#pragma once

#include <memory>
#include <vector>

#include "fpsi/fem/linear.hpp"
#include "fpsi/interface.hpp"
#include "fpsi/problem_data.hpp"

namespace fpsi {

struct FluidBoundary {
  std::vector<BoundaryTag> dirichlet;    // u_f = data.velocity
  std::vector<BoundaryTag> normal_zero;  // u_f . n = 0 on axis-aligned edges (symmetry)
  // Every other non-interface boundary edge is natural and receives data.traction.
};

/// Forcing and boundary data; empty functions mean zero.
struct StokesData {
  TimeVectorFunction force;     // f_f
  TimeScalarFunction source;    // q_f
  TimeVectorFunction velocity;  // Dirichlet trace
  TractionFunction traction;
};

/// Time-independent Stokes operators. The saddle system is
///   [A_uu  B^T] [u]   [f]
///   [B     0  ] [p] = [-(q_f, w)]
/// with A_uu = rho_f/dt M + a_f + gamma_f (G_n + G_t) and B = -(div u, w).
struct StokesBlocks {
  const DofMap* velocity = nullptr;
  const DofMap* pressure = nullptr;
  double dt = 0.0;
  bool quasistatic = false;

  SpMat mass;       // rho_f/dt M, empty pattern in quasistatic mode
  SpMat stiffness;  // a_f
  SpMat robin;      // gamma_f (G_n + G_t) on the interface
  SpMat A_uu;
  SpMat B;
  SpMat L_mu;  // [F_n F_t]: Robin data to velocity loads

  std::vector<int> essential;       // sorted velocity DOFs
  std::vector<char> essential_zero;  // 1 for symmetry DOFs (value 0), aligned with `essential`
  std::vector<int> natural_edges;    // boundary edges receiving tractions

  SpMat system;
  EssentialConstraints constraints;
  std::shared_ptr<DirectSolver> solver;

  int n_u() const { return velocity->n_dofs(); }
  int n_p() const { return pressure->n_dofs(); }
  int size() const { return n_u() + n_p(); }
};

StokesBlocks assemble_stokes_blocks(const PhysicalParams& params, double dt, const DofMap& velocity,
                                    const DofMap& pressure, const InterfaceOperators& ops,
                                    const FluidBoundary& boundary);

struct StokesRhs {
  Eigen::VectorXd load;        // size n_u + n_p, before essential lifting
  Eigen::VectorXd essential;  // values aligned with blocks.essential
};

/// Body force, inertia history, Robin loads <mu_n, v.n_f> + <mu_t, v.tau_f>,
/// boundary tractions and the mass source; data evaluated at time t.
StokesRhs stokes_rhs(const StokesBlocks& blocks, const Eigen::VectorXd& u_prev, const MuState& mu, double t,
                     const StokesData& data);

/// Adds L_mu [mu_n; mu_t] to the velocity rows of `load`.
void add_stokes_robin_load(const StokesBlocks& blocks, const MuState& mu, Eigen::VectorXd& load);
/// Velocity loads without the inertia and Robin parts (used by the monolithic scheme too).
Eigen::VectorXd stokes_data_load(const StokesBlocks& blocks, double t, const StokesData& data);
Eigen::VectorXd stokes_essential_values(const StokesBlocks& blocks, double t, const StokesData& data);

struct StokesSolution {
  Eigen::VectorXd u;
  Eigen::VectorXd p;
};

StokesSolution solve_stokes_step(const StokesBlocks& blocks, const StokesRhs& rhs);

}  // namespace fpsi
