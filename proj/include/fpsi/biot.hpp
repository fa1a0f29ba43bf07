#pragma once

#include <memory>
#include <vector>

#include "fpsi/fem/linear.hpp"
#include "fpsi/interface.hpp"
#include "fpsi/problem_data.hpp"

namespace fpsi {

/// Boundary roles of the structure edges. One tag may carry a displacement
/// role and a Darcy role at the same time.
struct PoroBoundary {
  std::vector<BoundaryTag> displacement;             // eta = data.displacement
  std::vector<BoundaryTag> tangential_displacement;  // eta . tau = data.displacement . tau (axis-aligned)
  std::vector<BoundaryTag> flux;                     // u_p . n = data.flux . n, essential
  std::vector<BoundaryTag> pressure;                 // p_p = data.pressure, natural
  // Non-interface edges without a displacement role receive data.traction.
};

/// Forcing and boundary data; empty functions mean zero.
struct BiotData {
  TimeVectorFunction force;         // f_p
  TimeScalarFunction source;        // q_p
  TimeVectorFunction displacement;  // Dirichlet data for eta
  TimeVectorFunction flux;          // Darcy velocity whose normal trace is imposed
  TimeScalarFunction pressure;      // pore pressure on pressure edges
  TractionFunction traction;        // total stress sigma_p n
};

/// Time-independent Biot operators over the unknowns [eta, u_p, p_p]. The
/// displacement rows are divided by dt and the mass row is negated so the
/// system matrix is symmetric:
///   [K_ee                   gamma_p/dt G_qe^T     alpha/dt B_e^T ]
///   [gamma_p/dt G_qe        A_d + gamma_p G_qq    B_q^T          ]
///   [alpha/dt B_e           B_q                   -s0/dt M_p     ]
/// with K_ee = rho_p/dt^3 M + A_e/dt + gamma_p/dt^2 (G_n + G_t).
struct BiotBlocks {
  const DofMap* displacement = nullptr;
  const DofMap* darcy_velocity = nullptr;
  const DofMap* darcy_pressure = nullptr;
  const LambdaSpace* space = nullptr;
  double dt = 0.0;
  PhysicalParams params;

  SpMat mass_eta;   // (eta, xi)
  SpMat elastic;    // a_e(eta, xi) [+ beta (eta, xi)]
  SpMat iface_n;    // <eta . n_p, xi . n_p>
  SpMat iface_t;    // <eta . tau_p, xi . tau_p>
  SpMat iface_qe;   // <u_p . n_p, xi . n_p>: rows eta, columns u_p
  SpMat iface_qq;   // <u_p . n_p, v . n_p>
  SpMat darcy;      // a_d
  SpMat div_eta;    // -(div eta, w)
  SpMat div_q;      // -(div u_p, w)
  SpMat mass_p;     // (p, w)

  // Interface operators (copied from InterfaceOperators).
  SpMat disp_n, disp_t, darcy_n, trace_n, trace_t;

  std::vector<int> essential;  // sorted, in system numbering
  struct EssentialSource {
    enum Kind { Displacement, Flux } kind;
    int dof;  // DOF in its own space
  };
  std::vector<EssentialSource> essential_source;  // aligned with `essential`
  std::vector<int> traction_edges;
  std::vector<int> pressure_edges;

  SpMat system;
  EssentialConstraints constraints;
  std::shared_ptr<DirectSolver> solver;

  int n_eta() const { return displacement->n_dofs(); }
  int n_q() const { return darcy_velocity->n_dofs(); }
  int n_p() const { return darcy_pressure->n_dofs(); }
  int size() const { return n_eta() + n_q() + n_p(); }
};

BiotBlocks assemble_biot_blocks(const PhysicalParams& params, double dt, const DofMap& displacement,
                                const DofMap& darcy_velocity, const DofMap& darcy_pressure, const LambdaSpace& space,
                                const InterfaceOperators& ops, const PoroBoundary& boundary);

/// Structure history of level n.
struct BiotHistory {
  Eigen::VectorXd eta;
  Eigen::VectorXd dt_eta;
  Eigen::VectorXd p;
};

struct BiotRhs {
  Eigen::VectorXd load;       // scaled like the system rows
  Eigen::VectorXd essential;  // aligned with blocks.essential
};

/// Right-hand side with Robin loads built from mu and the new fluid
/// velocity: g_n = mu_n - (gamma_p + gamma_f) u_f . n_f on (v + xi) . n_p and
/// g_t = mu_t - (gamma_p + gamma_f) u_f . tau_f - gamma_p gamma_BJS shear_f on xi . tau_p.
BiotRhs biot_rhs(const BiotBlocks& blocks, const BiotHistory& prev, const MuState& mu, const Eigen::VectorXd& u_f,
                 double t, const BiotData& data, const InterfaceFunction* shear_f = nullptr);

/// Adds the interface part of biot_rhs (Robin data, fluid traces, BJS shear) to `load`.
void add_biot_interface_load(const BiotBlocks& blocks, const MuState& mu, const Eigen::VectorXd& u_f,
                             const InterfaceFunction* shear_f, Eigen::VectorXd& load);

/// Unscaled data loads, shared with the monolithic scheme.
struct BiotDataLoads {
  Eigen::VectorXd eta;  // (f_p, xi) + tractions
  Eigen::VectorXd q;    // -<p_D, v . n>
  Eigen::VectorXd p;    // (q_p, w)
};
BiotDataLoads biot_data_loads(const BiotBlocks& blocks, double t, const BiotData& data);
Eigen::VectorXd biot_essential_values(const BiotBlocks& blocks, double t, const BiotData& data);
/// History part of the scaled right-hand side (no data, no interface terms).
Eigen::VectorXd biot_history_load(const BiotBlocks& blocks, const BiotHistory& prev);

struct BiotSolution {
  Eigen::VectorXd eta;
  Eigen::VectorXd u;
  Eigen::VectorXd p;
};

BiotSolution solve_biot_step(const BiotBlocks& blocks, const BiotRhs& rhs);

}  // namespace fpsi
