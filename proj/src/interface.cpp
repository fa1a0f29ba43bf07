#include "fpsi/interface.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "fpsi/fem/quadrature.hpp"

namespace fpsi {

namespace {

// 1D quadratic Lagrange basis on [0, 1]: left end, midpoint, right end.
inline std::array<double, 3> p2_line(double s) {
  return {(1.0 - s) * (1.0 - 2.0 * s), 4.0 * s * (1.0 - s), s * (2.0 * s - 1.0)};
}

bool same_point(Point2 a, Point2 b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y) < 1e-12; }

void check_size(const Eigen::VectorXd& v, Eigen::Index n, const char* what) {
  if (v.size() != n) {
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(n) + " coefficients, got " +
                                std::to_string(v.size()));
  }
}

}  // namespace

LambdaSpace::LambdaSpace(InterfaceMesh interface, const DofMap& fluid_velocity)
    : im_(std::move(interface)), fluid_mesh_(&fluid_velocity.mesh()) {
  if (im_.n_segments() == 0) throw MeshError("LambdaSpace: empty interface");
  if (fluid_velocity.family() != ElementFamily::VecP2c) {
    throw std::invalid_argument("LambdaSpace: fluid velocity must be VecP2c");
  }
  const TriMesh& m = *fluid_mesh_;
  const int nv = m.n_vertices();
  fluid_node_.assign(n_dofs(), -1);
  for (int k = 0; k < im_.n_segments(); ++k) {
    const auto& seg = im_.segments[k];
    const auto& e = m.edges[seg.fluid_edge];
    for (int j = 0; j < 2; ++j) {
      const Point2 p = m.vertices[e.v[j]];
      if (same_point(p, seg.a)) fluid_node_[2 * k] = e.v[j];
      if (same_point(p, seg.b)) fluid_node_[2 * k + 2] = e.v[j];
    }
    fluid_node_[2 * k + 1] = nv + seg.fluid_edge;
  }
  for (int i = 0; i < n_dofs(); ++i) {
    if (fluid_node_[i] < 0) throw MeshError("LambdaSpace: interface node " + std::to_string(i) + " not on fluid mesh");
  }

  Triplets trip;
  for (int k = 0; k < im_.n_segments(); ++k) {
    const double h = im_.segments[k].length() / 30.0;
    static constexpr double local[3][3] = {{4, 2, -1}, {2, 16, 2}, {-1, 2, 4}};
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) trip.emplace_back(2 * k + a, 2 * k + b, h * local[a][b]);
    }
  }
  mass_.resize(n_dofs(), n_dofs());
  mass_.setFromTriplets(trip.begin(), trip.end());
  mass_factor_.compute(mass_);
  if (mass_factor_.info() != Eigen::Success) throw std::logic_error("LambdaSpace: interface mass not SPD");
}

Point2 LambdaSpace::node_point(int i) const {
  const int m = im_.n_segments();
  if (i == 2 * m) return im_.segments[m - 1].b;
  const auto& seg = im_.segments[i / 2];
  return i % 2 == 0 ? seg.a : 0.5 * (seg.a + seg.b);
}

double LambdaSpace::segment_parameter(int k, Point2 x) const {
  const auto& seg = im_.segments[k];
  return (im_.arc_coordinate(x) - im_.arc_coordinate(seg.a)) / seg.length();
}

double LambdaSpace::value(const Eigen::VectorXd& c, int k, double s) const {
  const auto phi = p2_line(s);
  return phi[0] * c[2 * k] + phi[1] * c[2 * k + 1] + phi[2] * c[2 * k + 2];
}

Eigen::VectorXd LambdaSpace::load(const InterfaceFunction& g) const {
  const LineRule line = gauss_line(quadrature_points());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n_dofs());
  for (int k = 0; k < im_.n_segments(); ++k) {
    const auto& seg = im_.segments[k];
    const double len = seg.length();
    for (int q = 0; q < line.size(); ++q) {
      const double s = line.points[q];
      const double gv = g(k, seg.a + s * (seg.b - seg.a)) * line.weights[q] * len;
      const auto phi = p2_line(s);
      for (int a = 0; a < 3; ++a) b[2 * k + a] += gv * phi[a];
    }
  }
  return b;
}

Eigen::VectorXd LambdaSpace::solve_mass(const Eigen::VectorXd& b) const {
  check_size(b, n_dofs(), "LambdaSpace::solve_mass");
  return mass_factor_.solve(b);
}

double LambdaSpace::l2_norm(const Eigen::VectorXd& c) const {
  check_size(c, n_dofs(), "LambdaSpace::l2_norm");
  return std::sqrt(std::max(0.0, c.dot(mass_ * c)));
}

InterfaceFunction LambdaSpace::as_function(const Eigen::VectorXd& c) const {
  return [this, c](int k, Point2 x) { return value(c, k, segment_parameter(k, x)); };
}

std::pair<int, std::array<double, 2>> LambdaSpace::locate(const DofMap& V, InterfaceSide side, int k,
                                                          Point2 x) const {
  const bool on_fluid = &V.mesh() == fluid_mesh_;
  if (on_fluid != (side == InterfaceSide::Fluid)) {
    throw std::invalid_argument(side == InterfaceSide::Fluid ? "space is not defined on the fluid mesh"
                                                             : "space is defined on the fluid mesh, not the structure");
  }
  const auto& seg = im_.segments[k];
  const int cell = side == InterfaceSide::Fluid ? seg.fluid_cell : seg.poro_cell;
  if (cell < 0 || cell >= V.n_cells()) throw std::invalid_argument("interface cell outside the space's mesh");
  return {cell, V.geometry(cell).reference_point(x)};
}

SpMat LambdaSpace::coupling(const DofMap& V, InterfaceSide side, Point2 d) const {
  const LineRule line = gauss_line(quadrature_points());
  Triplets trip;
  BasisEval bv;
  for (int k = 0; k < im_.n_segments(); ++k) {
    const auto& seg = im_.segments[k];
    const double len = seg.length();
    for (int q = 0; q < line.size(); ++q) {
      const double s = line.points[q];
      const Point2 x = seg.a + s * (seg.b - seg.a);
      const auto [cell, xhat] = locate(V, side, k, x);
      V.eval(cell, xhat, bv);
      const auto dofs = V.cell_dofs(cell);
      const auto phi = p2_line(s);
      const double w = line.weights[q] * len;
      for (int i = 0; i < bv.n; ++i) {
        const double vd = bv.value[i][0] * d.x + bv.value[i][1] * d.y;
        if (vd == 0.0) continue;
        for (int a = 0; a < 3; ++a) trip.emplace_back(dofs[i], 2 * k + a, w * vd * phi[a]);
      }
    }
  }
  SpMat C(V.n_dofs(), n_dofs());
  C.setFromTriplets(trip.begin(), trip.end());
  C.prune(0.0);
  return C;
}

Eigen::VectorXd LambdaSpace::side_load(const DofMap& V, InterfaceSide side, const InterfaceFunction& g,
                                       Point2 d) const {
  const LineRule line = gauss_line(quadrature_points());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(V.n_dofs());
  BasisEval bv;
  for (int k = 0; k < im_.n_segments(); ++k) {
    const auto& seg = im_.segments[k];
    const double len = seg.length();
    for (int q = 0; q < line.size(); ++q) {
      const Point2 x = seg.a + line.points[q] * (seg.b - seg.a);
      const auto [cell, xhat] = locate(V, side, k, x);
      V.eval(cell, xhat, bv);
      const auto dofs = V.cell_dofs(cell);
      const double gw = g(k, x) * line.weights[q] * len;
      for (int i = 0; i < bv.n; ++i) b[dofs[i]] += gw * (bv.value[i][0] * d.x + bv.value[i][1] * d.y);
    }
  }
  return b;
}

SpMat LambdaSpace::fluid_trace(const DofMap& fluid_velocity, Point2 d) const {
  if (&fluid_velocity.mesh() != fluid_mesh_) throw std::invalid_argument("fluid_trace: space not on the fluid mesh");
  const int stride = fluid_velocity.n_scalar_nodes();
  Triplets trip;
  for (int i = 0; i < n_dofs(); ++i) {
    if (d.x != 0.0) trip.emplace_back(i, fluid_node_[i], d.x);
    if (d.y != 0.0) trip.emplace_back(i, stride + fluid_node_[i], d.y);
  }
  SpMat T(n_dofs(), fluid_velocity.n_dofs());
  T.setFromTriplets(trip.begin(), trip.end());
  return T;
}

InterfaceOperators build_interface_operators(const LambdaSpace& space, const DofMap& fluid_velocity,
                                             const DofMap& displacement, const DofMap& darcy_velocity) {
  const InterfaceMesh& im = space.interface();
  InterfaceOperators ops;
  ops.fluid_n = space.coupling(fluid_velocity, InterfaceSide::Fluid, im.normal_f);
  ops.fluid_t = space.coupling(fluid_velocity, InterfaceSide::Fluid, im.tangent_f);
  ops.trace_n = space.fluid_trace(fluid_velocity, im.normal_f);
  ops.trace_t = space.fluid_trace(fluid_velocity, im.tangent_f);
  ops.disp_n = space.coupling(displacement, InterfaceSide::Poro, im.normal_p);
  ops.disp_t = space.coupling(displacement, InterfaceSide::Poro, im.tangent_p());
  ops.darcy_n = space.coupling(darcy_velocity, InterfaceSide::Poro, im.normal_p);
  return ops;
}

TractionTrace stress_trace(const LambdaSpace& space, StressKind kind, const PhysicalParams& params,
                           const DofMap& vector_space, const Eigen::VectorXd& vector_field,
                           const DofMap* pressure_space, const Eigen::VectorXd* pressure) {
  const InterfaceSide side = kind == StressKind::Fluid ? InterfaceSide::Fluid : InterfaceSide::Poro;
  if (kind != StressKind::Elastic && (!pressure_space || !pressure)) {
    throw std::invalid_argument("stress_trace: pressure field required");
  }
  if ((&vector_space.mesh() == space.fluid_mesh()) != (side == InterfaceSide::Fluid)) {
    throw std::invalid_argument(side == InterfaceSide::Fluid ? "fluid stress requested from structure fields"
                                                             : "structure stress requested from fluid fields");
  }
  if (vector_space.family() != ElementFamily::VecP2c) throw std::invalid_argument("stress_trace: needs a VecP2c field");
  check_size(vector_field, vector_space.n_dofs(), "stress_trace");
  const Point2 n = side == InterfaceSide::Fluid ? space.interface().normal_f : space.interface().normal_p;
  const double two_mu = 2.0 * (kind == StressKind::Fluid ? params.mu_f : params.mu_p);
  const double lam = kind == StressKind::Fluid ? 0.0 : params.lambda_p;
  const double pcoef = kind == StressKind::Fluid ? 1.0 : (kind == StressKind::Poro ? params.alpha : 0.0);

  Eigen::VectorXd p = pressure ? *pressure : Eigen::VectorXd();
  return [&space, &vector_space, pressure_space, u = vector_field, p, side, n, two_mu, lam, pcoef](int k, Point2 x) {
    const auto [cell, xhat] = space.locate(vector_space, side, k, x);
    const auto fv = vector_space.eval_field(u, cell, xhat);
    double pv = 0.0;
    if (pcoef != 0.0) {
      const auto [pc, pxhat] = space.locate(*pressure_space, side, k, x);
      pv = pressure_space->eval_field(p, pc, pxhat).value[0];
    }
    const double d01 = 0.5 * (fv.grad[0][1] + fv.grad[1][0]);
    const double s00 = two_mu * fv.grad[0][0] + lam * fv.div - pcoef * pv;
    const double s11 = two_mu * fv.grad[1][1] + lam * fv.div - pcoef * pv;
    const double s01 = two_mu * d01;
    return std::array<double, 2>{s00 * n.x + s01 * n.y, s01 * n.x + s11 * n.y};
  };
}

InterfaceFunction fluid_shear(const LambdaSpace& space, const PhysicalParams& params, const DofMap& Vf,
                              const Eigen::VectorXd& u_f, const DofMap& Wf, const Eigen::VectorXd& p_f) {
  const TractionTrace tr = stress_trace(space, StressKind::Fluid, params, Vf, u_f, &Wf, &p_f);
  const Point2 t = space.interface().tangent_f;
  return [tr, t](int k, Point2 x) {
    const auto s = tr(k, x);
    return s[0] * t.x + s[1] * t.y;
  };
}

MuState init_mu_analytic(const LambdaSpace& space, const InterfaceFunction& robin_n,
                         const InterfaceFunction& robin_t) {
  if (!robin_n || !robin_t) throw std::invalid_argument("init_mu_analytic: closed-form Robin data missing");
  return {space.project(robin_n), space.project(robin_t)};
}

namespace {

struct PoroTraceSampler {
  const LambdaSpace& space;
  const PoroFields& poro;

  std::array<double, 2> at(const DofMap& V, const Eigen::VectorXd& x, int k, Point2 p) const {
    const auto [cell, xhat] = space.locate(V, InterfaceSide::Poro, k, p);
    return V.eval_field(x, cell, xhat).value;
  }
};

void check_poro(const PoroFields& poro) {
  check_size(poro.eta, poro.displacement.n_dofs(), "eta");
  check_size(poro.dt_eta, poro.displacement.n_dofs(), "dt_eta");
  check_size(poro.u_p, poro.darcy_velocity.n_dofs(), "u_p");
  check_size(poro.p_p, poro.darcy_pressure.n_dofs(), "p_p");
}

}  // namespace

MuState init_mu_discrete(const LambdaSpace& space, const PoroFields& poro, const PhysicalParams& params,
                         const InterfaceFunction* shear_f) {
  check_poro(poro);
  if (params.gamma_BJS > 0.0 && !shear_f) {
    throw std::invalid_argument("init_mu_discrete: fluid shear trace required when gamma_BJS > 0");
  }
  const InterfaceMesh& im = space.interface();
  const Point2 n = im.normal_p, t = im.tangent_p();
  const TractionTrace sigma = stress_trace(space, StressKind::Poro, params, poro.displacement, poro.eta,
                                           &poro.darcy_pressure, &poro.p_p);
  const PoroTraceSampler sample{space, poro};
  const double gf = params.gamma_f;
  auto robin_n = [&](int k, Point2 x) {
    const auto w = sample.at(poro.displacement, poro.dt_eta, k, x);
    const auto q = sample.at(poro.darcy_velocity, poro.u_p, k, x);
    const auto s = sigma(k, x);
    return -gf * ((w[0] + q[0]) * n.x + (w[1] + q[1]) * n.y) + s[0] * n.x + s[1] * n.y;
  };
  auto robin_t = [&](int k, Point2 x) {
    const auto w = sample.at(poro.displacement, poro.dt_eta, k, x);
    const auto s = sigma(k, x);
    double r = -gf * (w[0] * t.x + w[1] * t.y) + s[0] * t.x + s[1] * t.y;
    if (params.gamma_BJS > 0.0) r -= gf * params.gamma_BJS * (*shear_f)(k, x);
    return r;
  };
  return {space.project(robin_n), space.project(robin_t)};
}

MuState update_mu(const LambdaSpace& space, const InterfaceOperators& ops, const MuState& mu,
                  const Eigen::VectorXd& u_f, const Eigen::VectorXd& u_p, const Eigen::VectorXd& dt_eta,
                  const PhysicalParams& params, const InterfaceFunction* shear_f) {
  const int nl = space.n_dofs();
  check_size(mu.n, nl, "update_mu: mu_n");
  check_size(mu.tau, nl, "update_mu: mu_tau");
  check_size(u_f, ops.fluid_n.rows(), "update_mu: u_f");
  check_size(u_p, ops.darcy_n.rows(), "update_mu: u_p");
  check_size(dt_eta, ops.disp_n.rows(), "update_mu: dt_eta");
  if (params.gamma_BJS > 0.0 && !shear_f) {
    throw std::invalid_argument("update_mu: fluid shear trace required when gamma_BJS > 0");
  }
  const double g = params.gamma_f + params.gamma_p;
  const SpMat& M = space.mass();
  Eigen::VectorXd bn = M * mu.n - g * (ops.disp_n.transpose() * dt_eta + ops.darcy_n.transpose() * u_p +
                                       ops.fluid_n.transpose() * u_f);
  Eigen::VectorXd bt = M * mu.tau - g * (ops.disp_t.transpose() * dt_eta + ops.fluid_t.transpose() * u_f);
  if (params.gamma_BJS > 0.0) bt -= g * params.gamma_BJS * space.load(*shear_f);
  return {space.solve_mass(bn), space.solve_mass(bt)};
}

MuState update_mu_projected(const LambdaSpace& space, const InterfaceOperators& ops, const MuState& mu,
                            const Eigen::VectorXd& u_f, const PoroFields& poro, const PhysicalParams& params) {
  check_poro(poro);
  if (params.gamma_BJS > 0.0) throw std::invalid_argument("update_mu_projected: gamma_BJS must be zero");
  const InterfaceMesh& im = space.interface();
  const Point2 n = im.normal_p, t = im.tangent_p();
  const PoroTraceSampler sample{space, poro};
  const Eigen::VectorXd pn = space.project([&](int k, Point2 x) {
    const auto w = sample.at(poro.displacement, poro.dt_eta, k, x);
    const auto q = sample.at(poro.darcy_velocity, poro.u_p, k, x);
    return (w[0] + q[0]) * n.x + (w[1] + q[1]) * n.y;
  });
  const Eigen::VectorXd pt = space.project([&](int k, Point2 x) {
    const auto w = sample.at(poro.displacement, poro.dt_eta, k, x);
    return w[0] * t.x + w[1] * t.y;
  });
  const double g = params.gamma_f + params.gamma_p;
  return {mu.n - g * (pn + ops.trace_n * u_f), mu.tau - g * (pt + ops.trace_t * u_f)};
}

namespace {

SpMat hstack(const std::vector<const SpMat*>& blocks, Eigen::Index rows) {
  Triplets trip;
  Eigen::Index off = 0;
  for (const SpMat* b : blocks) {
    for (int k = 0; k < b->outerSize(); ++k) {
      for (SpMat::InnerIterator it(*b, k); it; ++it) trip.emplace_back(it.row(), off + it.col(), it.value());
    }
    off += b->cols();
  }
  SpMat R(rows, off);
  R.setFromTriplets(trip.begin(), trip.end());
  return R;
}

}  // namespace

ConstraintRows monolithic_constraint_rows(const InterfaceOperators& ops, const PhysicalParams& params, double dt) {
  if (params.gamma_f != params.gamma_p) {
    throw std::invalid_argument("monolithic coupling requires gamma_f == gamma_p");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("monolithic_constraint_rows: dt must be positive");
  ConstraintRows rows;
  rows.n_uf = static_cast<int>(ops.fluid_n.rows());
  rows.n_eta = static_cast<int>(ops.disp_n.rows());
  rows.n_up = static_cast<int>(ops.darcy_n.rows());
  const Eigen::Index nl = ops.fluid_n.cols();
  const SpMat fn = ops.fluid_n.transpose(), ft = ops.fluid_t.transpose();
  const SpMat cn = SpMat(ops.disp_n.transpose()) / dt, ct = SpMat(ops.disp_t.transpose()) / dt;
  const SpMat dn = ops.darcy_n.transpose();
  const SpMat zero(nl, rows.n_up);
  rows.normal = hstack({&fn, &cn, &dn}, nl);
  rows.tangential = hstack({&ft, &ct, &zero}, nl);
  return rows;
}

Eigen::VectorXd ConstraintRows::rhs_normal(const Eigen::VectorXd& eta_prev) const {
  return normal.middleCols(n_uf, n_eta) * eta_prev;
}

Eigen::VectorXd ConstraintRows::rhs_tangential(const Eigen::VectorXd& eta_prev) const {
  return tangential.middleCols(n_uf, n_eta) * eta_prev;
}

Eigen::VectorXd continuity_residual(const InterfaceOperators& ops, const Eigen::VectorXd& u_f,
                                    const Eigen::VectorXd& dt_eta, const Eigen::VectorXd& u_p) {
  const Eigen::Index nl = ops.fluid_n.cols();
  Eigen::VectorXd r(2 * nl);
  r.head(nl) = ops.fluid_n.transpose() * u_f + ops.disp_n.transpose() * dt_eta + ops.darcy_n.transpose() * u_p;
  r.tail(nl) = ops.fluid_t.transpose() * u_f + ops.disp_t.transpose() * dt_eta;
  return r;
}

void write_mu_csv(std::ostream& os, const LambdaSpace& space, const MuState& mu, double t, bool header) {
  if (header) os << "t,arc,x,y,mu_n,mu_tau\n";
  os << std::setprecision(17);
  for (int i = 0; i < space.n_dofs(); ++i) {
    const Point2 p = space.node_point(i);
    os << t << ',' << space.node_arc(i) << ',' << p.x << ',' << p.y << ',' << mu.n[i] << ',' << mu.tau[i] << '\n';
  }
}

}  // namespace fpsi
