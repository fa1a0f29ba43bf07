#pragma once

#include <functional>
#include <iosfwd>
#include <memory>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "fpsi/fem/assembly.hpp"
#include "fpsi/fem/dofmap.hpp"
#include "fpsi/mesh.hpp"
#include "fpsi/params.hpp"

namespace fpsi {

/// Scalar data on the interface, evaluated per segment.
using InterfaceFunction = std::function<double(int segment, Point2 x)>;
/// Traction vector sigma n on the interface, evaluated per segment.
using TractionTrace = std::function<std::array<double, 2>(int segment, Point2 x)>;

enum class InterfaceSide { Fluid, Poro };

/// Normal and tangential Robin data, both stored in the trace space.
struct MuState {
  Eigen::VectorXd n;
  Eigen::VectorXd tau;
};

/// Continuous piecewise quadratics on the interface: the trace of the fluid
/// velocity space, one scalar copy per component. Node 2k is the left end of
/// segment k and node 2k+1 its midpoint, so nodes run in arc order.
class LambdaSpace {
 public:
  LambdaSpace(InterfaceMesh interface, const DofMap& fluid_velocity);

  const InterfaceMesh& interface() const { return im_; }
  int n_dofs() const { return 2 * im_.n_segments() + 1; }
  const SpMat& mass() const { return mass_; }

  Point2 node_point(int i) const;
  double node_arc(int i) const { return im_.arc_coordinate(node_point(i)); }
  /// Scalar P2 node of the fluid mesh sitting at Lambda node i.
  int fluid_node(int i) const { return fluid_node_[i]; }

  /// Local parameter s in [0, 1] of point x on segment k.
  double segment_parameter(int k, Point2 x) const;
  /// Value of coefficient vector c at parameter s of segment k.
  double value(const Eigen::VectorXd& c, int k, double s) const;

  Eigen::VectorXd load(const InterfaceFunction& g) const;
  Eigen::VectorXd solve_mass(const Eigen::VectorXd& b) const;
  /// L2 projection onto the space.
  Eigen::VectorXd project(const InterfaceFunction& g) const { return solve_mass(load(g)); }
  double l2_norm(const Eigen::VectorXd& c) const;
  InterfaceFunction as_function(const Eigen::VectorXd& c) const;

  /// <chi_j, v_i . d> for a space living on one side: rows are DOFs of V,
  /// columns Lambda nodes.
  SpMat coupling(const DofMap& V, InterfaceSide side, Point2 d) const;
  /// <g, v . d> for the DOFs of V.
  Eigen::VectorXd side_load(const DofMap& V, InterfaceSide side, const InterfaceFunction& g, Point2 d) const;
  /// Nodal extraction of u . d from a fluid VecP2c field (rows are Lambda nodes).
  SpMat fluid_trace(const DofMap& fluid_velocity, Point2 d) const;

  /// Cell and reference point on the requested side for a point of segment k.
  std::pair<int, std::array<double, 2>> locate(const DofMap& V, InterfaceSide side, int k, Point2 x) const;

  const TriMesh* fluid_mesh() const { return fluid_mesh_; }
  int quadrature_points() const { return 5; }

 private:
  InterfaceMesh im_;
  const TriMesh* fluid_mesh_;
  std::vector<int> fluid_node_;
  SpMat mass_;
  Eigen::SimplicialLLT<SpMat> mass_factor_;
};

/// Interface operators shared by the subsolvers and the schemes.
struct InterfaceOperators {
  SpMat fluid_n, fluid_t;  // <chi, v_f . n_f>, <chi, v_f . tau_f>   (n_uf x n_lambda)
  SpMat trace_n, trace_t;  // nodal u_f . n_f, u_f . tau_f           (n_lambda x n_uf)
  SpMat disp_n, disp_t;    // <chi, xi . n_p>, <chi, xi . tau_p>     (n_eta x n_lambda)
  SpMat darcy_n;           // <chi, v_p . n_p>                        (n_up x n_lambda)
};

InterfaceOperators build_interface_operators(const LambdaSpace& space, const DofMap& fluid_velocity,
                                             const DofMap& displacement, const DofMap& darcy_velocity);

enum class StressKind { Fluid, Poro, Elastic };

/// One-sided traction sigma n on the interface: fluid stress with n_f, poro
/// or elastic stress with n_p. `pressure_space`/`p` may be null for Elastic.
TractionTrace stress_trace(const LambdaSpace& space, StressKind kind, const PhysicalParams& params,
                           const DofMap& vector_space, const Eigen::VectorXd& vector_field,
                           const DofMap* pressure_space, const Eigen::VectorXd* pressure);

/// (sigma_f n_f) . tau_f as an interface function.
InterfaceFunction fluid_shear(const LambdaSpace& space, const PhysicalParams& params, const DofMap& Vf,
                              const Eigen::VectorXd& u_f, const DofMap& Wf, const Eigen::VectorXd& p_f);

/// Projects closed-form Robin data.
MuState init_mu_analytic(const LambdaSpace& space, const InterfaceFunction& robin_n,
                         const InterfaceFunction& robin_t);

/// Borrowed view of the structure-side fields.
struct PoroFields {
  const DofMap& displacement;
  const DofMap& darcy_velocity;
  const DofMap& darcy_pressure;
  const Eigen::VectorXd& eta;
  const Eigen::VectorXd& dt_eta;
  const Eigen::VectorXd& u_p;
  const Eigen::VectorXd& p_p;
};

/// Initial Robin data from discrete fields:
///   mu_n = P[-gamma_f (dt_eta + u_p) . n_p + sigma_p n_p . n_p]
///   mu_t = P[-gamma_f dt_eta . tau_p + sigma_p n_p . tau_p - gamma_f gamma_BJS shear_f]
/// `shear_f` is required when gamma_BJS > 0.
MuState init_mu_discrete(const LambdaSpace& space, const PoroFields& poro, const PhysicalParams& params,
                         const InterfaceFunction* shear_f = nullptr);

/// Weak update: M mu' = M mu - (gamma_f + gamma_p)(<(dt_eta + u_p) . n_p + u_f . n_f, chi>)
/// and the tangential analogue including gamma_BJS <shear_f, chi>.
MuState update_mu(const LambdaSpace& space, const InterfaceOperators& ops, const MuState& mu,
                  const Eigen::VectorXd& u_f, const Eigen::VectorXd& u_p, const Eigen::VectorXd& dt_eta,
                  const PhysicalParams& params, const InterfaceFunction* shear_f = nullptr);

/// Matrix form mu' = mu - (gamma_f + gamma_p)(P[poro traces] + fluid nodal trace),
/// with the poro traces evaluated pointwise. Requires gamma_BJS == 0.
MuState update_mu_projected(const LambdaSpace& space, const InterfaceOperators& ops, const MuState& mu,
                            const Eigen::VectorXd& u_f, const PoroFields& poro, const PhysicalParams& params);

/// Weak velocity continuity rows over the stacked unknowns [u_f, eta, u_p]:
///   normal:     F_n^T u_f + C_n^T eta / dt + D_n^T u_p = C_n^T eta^n / dt
///   tangential: F_t^T u_f + C_t^T eta / dt             = C_t^T eta^n / dt
struct ConstraintRows {
  SpMat normal;
  SpMat tangential;
  int n_uf = 0, n_eta = 0, n_up = 0;

  Eigen::VectorXd rhs_normal(const Eigen::VectorXd& eta_prev) const;
  Eigen::VectorXd rhs_tangential(const Eigen::VectorXd& eta_prev) const;
};
ConstraintRows monolithic_constraint_rows(const InterfaceOperators& ops, const PhysicalParams& params, double dt);

/// Weak continuity residuals of a state: <(dt_eta + u_p) . n_p + u_f . n_f, chi> and the
/// tangential analogue, stacked as [normal; tangential].
Eigen::VectorXd continuity_residual(const InterfaceOperators& ops, const Eigen::VectorXd& u_f,
                                    const Eigen::VectorXd& dt_eta, const Eigen::VectorXd& u_p);

/// CSV rows: t, arc, x, y, mu_n, mu_tau per Lambda node.
void write_mu_csv(std::ostream& os, const LambdaSpace& space, const MuState& mu, double t, bool header);

}  // namespace fpsi
