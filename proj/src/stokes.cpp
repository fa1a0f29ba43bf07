#include "fpsi/stokes.hpp"

#include <algorithm>
#include <cmath>

namespace fpsi {

namespace {

bool has_tag(const std::vector<BoundaryTag>& tags, BoundaryTag t) {
  return std::find(tags.begin(), tags.end(), t) != tags.end();
}

}  // namespace

StokesBlocks assemble_stokes_blocks(const PhysicalParams& params, double dt, const DofMap& velocity,
                                    const DofMap& pressure, const InterfaceOperators& ops,
                                    const FluidBoundary& boundary) {
  if (velocity.family() != ElementFamily::VecP2c || pressure.family() != ElementFamily::P1c) {
    throw std::invalid_argument("Stokes needs the Taylor-Hood pair (VecP2c, P1c)");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("Stokes: dt must be positive");
  const TriMesh& m = velocity.mesh();
  if (m.edges_with_tag(BoundaryTag::Interface).empty()) throw MeshError("Stokes: fluid mesh has no Interface edges");
  if (ops.fluid_n.rows() != velocity.n_dofs()) throw std::invalid_argument("Stokes: interface operators do not match");

  StokesBlocks b;
  b.velocity = &velocity;
  b.pressure = &pressure;
  b.dt = dt;
  b.quasistatic = params.quasistatic_fluid;
  const int nu = velocity.n_dofs(), np = pressure.n_dofs();

  b.stiffness = assemble_form({FormKind::SymGradStiffness}, velocity, velocity, params);
  b.mass = b.quasistatic ? SpMat(nu, nu)
                         : assemble_form({FormKind::VectorMass, params.rho_f / dt}, velocity, velocity, params);
  b.robin = assemble_form({FormKind::InterfaceNormalMass, params.gamma_f}, velocity, velocity, params) +
            assemble_form({FormKind::InterfaceTangentialMass, params.gamma_f}, velocity, velocity, params);
  b.A_uu = b.mass + b.stiffness + b.robin;
  b.B = assemble_form({FormKind::DivCoupling}, velocity, pressure, params);

  const int nl = static_cast<int>(ops.fluid_n.cols());
  {
    Triplets trip;
    add_block(trip, ops.fluid_n, 0, 0);
    add_block(trip, ops.fluid_t, 0, nl);
    b.L_mu.resize(nu, 2 * nl);
    b.L_mu.setFromTriplets(trip.begin(), trip.end());
  }

  // Essential DOFs: Dirichlet takes precedence over the symmetry condition.
  const std::vector<int> dir = velocity.boundary_dofs(boundary.dirichlet);
  std::vector<int> sym;
  const int stride = velocity.n_scalar_nodes();
  for (int e = 0; e < m.n_edges(); ++e) {
    if (!m.edge_tags[e] || !has_tag(boundary.normal_zero, *m.edge_tags[e])) continue;
    const Point2 n = m.outward_normal(m.edges[e].cells[0], e);
    const int comp = std::abs(n.x) > std::abs(n.y) ? 0 : 1;
    if (std::abs(comp == 0 ? n.y : n.x) > 1e-12) {
      throw MeshError("symmetry condition needs axis-aligned edges (edge " + std::to_string(e) + ")");
    }
    for (int node : {m.edges[e].v[0], m.edges[e].v[1], m.n_vertices() + e}) sym.push_back(comp * stride + node);
  }
  std::vector<std::pair<int, char>> ess;
  for (int d : dir) ess.emplace_back(d, 0);
  for (int d : sym) {
    if (!std::binary_search(dir.begin(), dir.end(), d)) ess.emplace_back(d, 1);
  }
  std::sort(ess.begin(), ess.end());
  ess.erase(std::unique(ess.begin(), ess.end(), [](auto& x, auto& y) { return x.first == y.first; }), ess.end());
  for (auto [d, z] : ess) {
    b.essential.push_back(d);
    b.essential_zero.push_back(z);
  }

  for (int e = 0; e < m.n_edges(); ++e) {
    if (!m.edges[e].on_boundary() || !m.edge_tags[e]) continue;
    const BoundaryTag t = *m.edge_tags[e];
    if (t == BoundaryTag::Interface || has_tag(boundary.dirichlet, t)) continue;
    b.natural_edges.push_back(e);
  }

  Triplets trip;
  add_block(trip, b.A_uu, 0, 0);
  add_block(trip, SpMat(b.B.transpose()), 0, nu);
  add_block(trip, b.B, nu, 0);
  b.system.resize(nu + np, nu + np);
  b.system.setFromTriplets(trip.begin(), trip.end());
  b.constraints = EssentialConstraints(b.system, b.essential);
  b.solver = std::make_shared<DirectSolver>("stokes");
  try {
    b.solver->factorize(b.constraints.matrix());
  } catch (const SolverError& e) {
    throw SolverError(std::string(e.what()) +
                      " (the pressure may be undetermined: add a traction boundary or pin the pressure)");
  }
  return b;
}

Eigen::VectorXd stokes_data_load(const StokesBlocks& blocks, double t, const StokesData& data) {
  const DofMap& V = *blocks.velocity;
  Eigen::VectorXd f = Eigen::VectorXd::Zero(blocks.n_u());
  const int qdeg = 6;
  if (data.force) {
    f += assemble_cell_load(V, qdeg, [&](const BasisEval& v, int j, Point2 x) {
      const auto ff = data.force(t, x);
      return ff[0] * v.value[j][0] + ff[1] * v.value[j][1];
    });
  }
  if (data.traction) {
    for (const auto& [tag, edges] : group_edges_by_tag(V.mesh(), blocks.natural_edges)) {
      f += assemble_edge_load(V, edges, qdeg, [&, tag = tag](const BasisEval& v, int j, Point2 x, Point2 n) {
        const auto s = data.traction(t, x, n, tag);
        return s[0] * v.value[j][0] + s[1] * v.value[j][1];
      });
    }
  }
  return f;
}

Eigen::VectorXd stokes_essential_values(const StokesBlocks& blocks, double t, const StokesData& data) {
  const DofMap& V = *blocks.velocity;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(blocks.essential.size()));
  if (!data.velocity) return g;
  for (std::size_t i = 0; i < blocks.essential.size(); ++i) {
    if (blocks.essential_zero[i]) continue;
    const int d = blocks.essential[i];
    g[static_cast<Eigen::Index>(i)] = data.velocity(t, V.node_point(d))[V.dof_component(d)];
  }
  return g;
}

StokesRhs stokes_rhs(const StokesBlocks& blocks, const Eigen::VectorXd& u_prev, const MuState& mu, double t,
                     const StokesData& data) {
  const int nu = blocks.n_u(), np = blocks.n_p();
  if (u_prev.size() != nu) throw std::invalid_argument("stokes_rhs: previous velocity has the wrong size");
  StokesRhs r;
  r.load = Eigen::VectorXd::Zero(nu + np);
  r.load.head(nu) = stokes_data_load(blocks, t, data);
  add_stokes_robin_load(blocks, mu, r.load);
  if (!blocks.quasistatic) r.load.head(nu) += blocks.mass * u_prev;
  if (data.source) {
    r.load.tail(np) = -assemble_cell_load(*blocks.pressure, 6, [&](const BasisEval& w, int j, Point2 x) {
      return data.source(t, x) * w.value[j][0];
    });
  }
  r.essential = stokes_essential_values(blocks, t, data);
  return r;
}

void add_stokes_robin_load(const StokesBlocks& blocks, const MuState& mu, Eigen::VectorXd& load) {
  const Eigen::Index nl = blocks.L_mu.cols() / 2;
  if (mu.n.size() != nl || mu.tau.size() != nl) {
    throw std::invalid_argument("stokes_rhs: mu has " + std::to_string(mu.n.size()) + " coefficients, trace space has " +
                                std::to_string(nl));
  }
  Eigen::VectorXd m(2 * nl);
  m << mu.n, mu.tau;
  load.head(blocks.n_u()) += blocks.L_mu * m;
}

StokesSolution solve_stokes_step(const StokesBlocks& blocks, const StokesRhs& rhs) {
  if (rhs.load.size() != blocks.size()) throw std::invalid_argument("solve_stokes_step: rhs has the wrong size");
  const Eigen::VectorXd x = blocks.solver->solve(blocks.constraints.lift(rhs.load, rhs.essential));
  return {x.head(blocks.n_u()), x.tail(blocks.n_p())};
}

}  // namespace fpsi
