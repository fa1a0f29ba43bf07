#include "fpsi/biot.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace fpsi {

namespace {

bool has_tag(const std::vector<BoundaryTag>& tags, BoundaryTag t) {
  return std::find(tags.begin(), tags.end(), t) != tags.end();
}

void check_size(const Eigen::VectorXd& v, Eigen::Index n, const char* what) {
  if (v.size() != n) {
    throw std::invalid_argument(std::string("biot_rhs: ") + what + " has " + std::to_string(v.size()) +
                                " entries, expected " + std::to_string(n));
  }
}

}  // namespace

BiotBlocks assemble_biot_blocks(const PhysicalParams& params, double dt, const DofMap& displacement,
                                const DofMap& darcy_velocity, const DofMap& darcy_pressure, const LambdaSpace& space,
                                const InterfaceOperators& ops, const PoroBoundary& boundary) {
  if (displacement.family() != ElementFamily::VecP2c) throw std::invalid_argument("Biot: displacement must be VecP2c");
  const bool rt0 = darcy_velocity.family() == ElementFamily::RT0 && darcy_pressure.family() == ElementFamily::P0;
  const bool rt1 = darcy_velocity.family() == ElementFamily::RT1 && darcy_pressure.family() == ElementFamily::P1dc;
  if (!rt0 && !rt1) throw std::invalid_argument("Biot: Darcy pair must be RT0/P0 or RT1/P1dc");
  if (!(dt > 0.0)) throw std::invalid_argument("Biot: dt must be positive");
  const TriMesh& m = displacement.mesh();
  if (m.edges_with_tag(BoundaryTag::Interface).empty()) throw MeshError("Biot: structure mesh has no Interface edges");
  if (ops.disp_n.rows() != displacement.n_dofs() || ops.darcy_n.rows() != darcy_velocity.n_dofs()) {
    throw std::invalid_argument("Biot: interface operators do not match the spaces");
  }

  BiotBlocks b;
  b.displacement = &displacement;
  b.darcy_velocity = &darcy_velocity;
  b.darcy_pressure = &darcy_pressure;
  b.space = &space;
  b.dt = dt;
  b.params = params;

  b.mass_eta = assemble_form({FormKind::VectorMass}, displacement, displacement, params);
  FormDescriptor el{FormKind::Elasticity};
  el.include_spring = params.beta > 0.0;
  b.elastic = assemble_form(el, displacement, displacement, params);
  b.iface_n = assemble_form({FormKind::InterfaceNormalMass}, displacement, displacement, params);
  b.iface_t = assemble_form({FormKind::InterfaceTangentialMass}, displacement, displacement, params);
  b.iface_qe = assemble_form({FormKind::InterfaceNormalMass}, darcy_velocity, displacement, params);
  b.iface_qq = assemble_form({FormKind::InterfaceNormalMass}, darcy_velocity, darcy_velocity, params);
  b.darcy = assemble_form({FormKind::DarcyMass}, darcy_velocity, darcy_velocity, params);
  b.div_eta = assemble_form({FormKind::DivCoupling}, displacement, darcy_pressure, params);
  b.div_q = assemble_form({FormKind::DivCoupling}, darcy_velocity, darcy_pressure, params);
  b.mass_p = assemble_form({FormKind::ScalarMass}, darcy_pressure, darcy_pressure, params);
  b.disp_n = ops.disp_n;
  b.disp_t = ops.disp_t;
  b.darcy_n = ops.darcy_n;
  b.trace_n = ops.trace_n;
  b.trace_t = ops.trace_t;

  const int ne = b.n_eta(), nq = b.n_q();

  // Essential DOFs. Full displacement data overrides the tangential-only role.
  std::map<int, BiotBlocks::EssentialSource> ess;
  for (int d : displacement.boundary_dofs(boundary.displacement)) ess[d] = {BiotBlocks::EssentialSource::Displacement, d};
  const int stride = displacement.n_scalar_nodes();
  for (int e = 0; e < m.n_edges(); ++e) {
    if (!m.edge_tags[e] || !has_tag(boundary.tangential_displacement, *m.edge_tags[e])) continue;
    const Point2 n = m.outward_normal(m.edges[e].cells[0], e);
    const int comp = std::abs(n.x) > std::abs(n.y) ? 1 : 0;
    if (std::min(std::abs(n.x), std::abs(n.y)) > 1e-12) {
      throw MeshError("tangential displacement condition needs axis-aligned edges (edge " + std::to_string(e) + ")");
    }
    for (int node : {m.edges[e].v[0], m.edges[e].v[1], m.n_vertices() + e}) {
      const int d = comp * stride + node;
      ess.emplace(d, BiotBlocks::EssentialSource{BiotBlocks::EssentialSource::Displacement, d});
    }
  }
  for (int d : darcy_velocity.boundary_dofs(boundary.flux)) ess[ne + d] = {BiotBlocks::EssentialSource::Flux, d};
  for (const auto& [dof, src] : ess) {
    b.essential.push_back(dof);
    b.essential_source.push_back(src);
  }

  for (int e = 0; e < m.n_edges(); ++e) {
    if (!m.edges[e].on_boundary() || !m.edge_tags[e]) continue;
    const BoundaryTag t = *m.edge_tags[e];
    if (t == BoundaryTag::Interface) continue;
    if (!has_tag(boundary.displacement, t)) b.traction_edges.push_back(e);
    if (has_tag(boundary.pressure, t)) b.pressure_edges.push_back(e);
  }

  const double gp = params.gamma_p;
  const SpMat Kee = (params.rho_p / (dt * dt * dt)) * b.mass_eta + (1.0 / dt) * b.elastic +
                    (gp / (dt * dt)) * (b.iface_n + b.iface_t);
  const SpMat Aqq = b.darcy + gp * b.iface_qq;
  Triplets trip;
  add_block(trip, Kee, 0, 0);
  add_block(trip, b.iface_qe, 0, ne, gp / dt);
  add_block(trip, SpMat(b.div_eta.transpose()), 0, ne + nq, params.alpha / dt);
  add_block(trip, SpMat(b.iface_qe.transpose()), ne, 0, gp / dt);
  add_block(trip, Aqq, ne, ne);
  add_block(trip, SpMat(b.div_q.transpose()), ne, ne + nq);
  add_block(trip, b.div_eta, ne + nq, 0, params.alpha / dt);
  add_block(trip, b.div_q, ne + nq, ne);
  add_block(trip, b.mass_p, ne + nq, ne + nq, -params.s0 / dt);
  b.system.resize(b.size(), b.size());
  b.system.setFromTriplets(trip.begin(), trip.end());
  b.constraints = EssentialConstraints(b.system, b.essential);
  b.solver = std::make_shared<DirectSolver>("biot");
  b.solver->factorize(b.constraints.matrix());
  return b;
}

BiotDataLoads biot_data_loads(const BiotBlocks& blocks, double t, const BiotData& data) {
  const DofMap& X = *blocks.displacement;
  const DofMap& V = *blocks.darcy_velocity;
  const DofMap& W = *blocks.darcy_pressure;
  const int qdeg = 6;
  BiotDataLoads l{Eigen::VectorXd::Zero(blocks.n_eta()), Eigen::VectorXd::Zero(blocks.n_q()),
                  Eigen::VectorXd::Zero(blocks.n_p())};
  if (data.force) {
    l.eta += assemble_cell_load(X, qdeg, [&](const BasisEval& v, int j, Point2 x) {
      const auto f = data.force(t, x);
      return f[0] * v.value[j][0] + f[1] * v.value[j][1];
    });
  }
  if (data.traction) {
    for (const auto& [tag, edges] : group_edges_by_tag(X.mesh(), blocks.traction_edges)) {
      l.eta += assemble_edge_load(X, edges, qdeg, [&, tag = tag](const BasisEval& v, int j, Point2 x, Point2 n) {
        const auto s = data.traction(t, x, n, tag);
        return s[0] * v.value[j][0] + s[1] * v.value[j][1];
      });
    }
  }
  if (data.pressure && !blocks.pressure_edges.empty()) {
    l.q -= assemble_edge_load(V, blocks.pressure_edges, qdeg, [&](const BasisEval& v, int j, Point2 x, Point2 n) {
      return data.pressure(t, x) * (v.value[j][0] * n.x + v.value[j][1] * n.y);
    });
  }
  if (data.source) {
    l.p += assemble_cell_load(W, qdeg, [&](const BasisEval& w, int j, Point2 x) {
      return data.source(t, x) * w.value[j][0];
    });
  }
  return l;
}

Eigen::VectorXd biot_essential_values(const BiotBlocks& blocks, double t, const BiotData& data) {
  const DofMap& X = *blocks.displacement;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(blocks.essential.size()));
  std::vector<int> flux_dofs;
  std::vector<Eigen::Index> flux_slots;
  for (std::size_t i = 0; i < blocks.essential.size(); ++i) {
    const auto& src = blocks.essential_source[i];
    if (src.kind == BiotBlocks::EssentialSource::Displacement) {
      if (data.displacement) g[static_cast<Eigen::Index>(i)] = data.displacement(t, X.node_point(src.dof))[X.dof_component(src.dof)];
    } else {
      flux_dofs.push_back(src.dof);
      flux_slots.push_back(static_cast<Eigen::Index>(i));
    }
  }
  if (data.flux && !flux_dofs.empty()) {
    const Eigen::VectorXd v =
        blocks.darcy_velocity->interpolate_dofs([&](Point2 x) { return data.flux(t, x); }, flux_dofs);
    for (std::size_t k = 0; k < flux_slots.size(); ++k) g[flux_slots[k]] = v[static_cast<Eigen::Index>(k)];
  }
  return g;
}

Eigen::VectorXd biot_history_load(const BiotBlocks& blocks, const BiotHistory& prev) {
  const int ne = blocks.n_eta(), nq = blocks.n_q(), np = blocks.n_p();
  check_size(prev.eta, ne, "eta^n");
  check_size(prev.dt_eta, ne, "dt_eta^n");
  check_size(prev.p, np, "p^n");
  const double dt = blocks.dt;
  const PhysicalParams& pr = blocks.params;
  Eigen::VectorXd r = Eigen::VectorXd::Zero(blocks.size());
  r.head(ne) = ((pr.rho_p / (dt * dt)) * (blocks.mass_eta * (prev.eta + dt * prev.dt_eta)) +
                (pr.gamma_p / dt) * (blocks.iface_n * prev.eta + blocks.iface_t * prev.eta)) /
               dt;
  r.segment(ne, nq) = (pr.gamma_p / dt) * (blocks.iface_qe.transpose() * prev.eta);
  r.tail(np) = -(pr.s0 / dt) * (blocks.mass_p * prev.p) + (pr.alpha / dt) * (blocks.div_eta * prev.eta);
  return r;
}

BiotRhs biot_rhs(const BiotBlocks& blocks, const BiotHistory& prev, const MuState& mu, const Eigen::VectorXd& u_f,
                 double t, const BiotData& data, const InterfaceFunction* shear_f) {
  const int ne = blocks.n_eta(), nq = blocks.n_q(), np = blocks.n_p();
  const BiotDataLoads d = biot_data_loads(blocks, t, data);
  BiotRhs r;
  r.load = biot_history_load(blocks, prev);
  r.load.head(ne) += d.eta / blocks.dt;
  r.load.segment(ne, nq) += d.q;
  r.load.tail(np) -= d.p;
  add_biot_interface_load(blocks, mu, u_f, shear_f, r.load);
  r.essential = biot_essential_values(blocks, t, data);
  return r;
}

void add_biot_interface_load(const BiotBlocks& blocks, const MuState& mu, const Eigen::VectorXd& u_f,
                             const InterfaceFunction* shear_f, Eigen::VectorXd& load) {
  const int ne = blocks.n_eta(), nq = blocks.n_q();
  const Eigen::Index nl = blocks.space->n_dofs();
  check_size(mu.n, nl, "mu_n");
  check_size(mu.tau, nl, "mu_tau");
  check_size(u_f, blocks.trace_n.cols(), "u_f");
  const PhysicalParams& pr = blocks.params;
  if (pr.gamma_BJS > 0.0 && !shear_f) throw std::invalid_argument("biot_rhs: fluid shear required when gamma_BJS > 0");
  const double g = pr.gamma_p + pr.gamma_f;

  const Eigen::VectorXd gn = mu.n - g * (blocks.trace_n * u_f);
  const Eigen::VectorXd gt = mu.tau - g * (blocks.trace_t * u_f);
  Eigen::VectorXd xi = blocks.disp_n * gn + blocks.disp_t * gt;
  if (pr.gamma_BJS > 0.0) {
    xi -= pr.gamma_p * pr.gamma_BJS *
          blocks.space->side_load(*blocks.displacement, InterfaceSide::Poro, *shear_f, blocks.space->interface().tangent_p());
  }
  load.head(ne) += xi / blocks.dt;
  load.segment(ne, nq) += blocks.darcy_n * gn;
}

BiotSolution solve_biot_step(const BiotBlocks& blocks, const BiotRhs& rhs) {
  if (rhs.load.size() != blocks.size()) throw std::invalid_argument("solve_biot_step: rhs has the wrong size");
  const Eigen::VectorXd x = blocks.solver->solve(blocks.constraints.lift(rhs.load, rhs.essential));
  const int ne = blocks.n_eta(), nq = blocks.n_q();
  return {x.head(ne), x.segment(ne, nq), x.tail(blocks.n_p())};
}

}  // namespace fpsi
