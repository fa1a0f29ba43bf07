#include "fpsi/schemes.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace fpsi {

const char* to_string(SchemeKind k) {
  switch (k) {
    case SchemeKind::NonIterative: return "noniterative";
    case SchemeKind::Iterative: return "iterative";
    case SchemeKind::Monolithic: return "monolithic";
  }
  return "?";
}

SchemeKind scheme_from_string(const std::string& s) {
  if (s == "noniterative") return SchemeKind::NonIterative;
  if (s == "iterative") return SchemeKind::Iterative;
  if (s == "monolithic") return SchemeKind::Monolithic;
  throw ConfigError("unknown scheme '" + s + "' (expected noniterative, iterative or monolithic)");
}

std::shared_ptr<const Discretization> make_discretization(TriMesh fluid, TriMesh poro, DarcyPair pair) {
  auto d = std::make_shared<Discretization>();
  d->fluid_mesh = std::make_shared<const TriMesh>(std::move(fluid));
  d->poro_mesh = std::make_shared<const TriMesh>(std::move(poro));
  d->darcy_pair = pair;
  d->fluid_velocity = std::make_unique<DofMap>(d->fluid_mesh, ElementFamily::VecP2c);
  d->fluid_pressure = std::make_unique<DofMap>(d->fluid_mesh, ElementFamily::P1c);
  d->displacement = std::make_unique<DofMap>(d->poro_mesh, ElementFamily::VecP2c);
  const bool rt1 = pair == DarcyPair::RT1P1dc;
  d->darcy_velocity = std::make_unique<DofMap>(d->poro_mesh, rt1 ? ElementFamily::RT1 : ElementFamily::RT0);
  d->darcy_pressure = std::make_unique<DofMap>(d->poro_mesh, rt1 ? ElementFamily::P1dc : ElementFamily::P0);
  d->lambda = std::make_unique<LambdaSpace>(extract_interface(*d->fluid_mesh, *d->poro_mesh), *d->fluid_velocity);
  d->ops = build_interface_operators(*d->lambda, *d->fluid_velocity, *d->displacement, *d->darcy_velocity);
  return d;
}

CoupledState zero_state(const Discretization& d, double t) {
  CoupledState s;
  s.t = t;
  s.u_f = Eigen::VectorXd::Zero(d.fluid_velocity->n_dofs());
  s.p_f = Eigen::VectorXd::Zero(d.fluid_pressure->n_dofs());
  s.eta = Eigen::VectorXd::Zero(d.displacement->n_dofs());
  s.dt_eta = Eigen::VectorXd::Zero(d.displacement->n_dofs());
  s.u_p = Eigen::VectorXd::Zero(d.darcy_velocity->n_dofs());
  s.p_p = Eigen::VectorXd::Zero(d.darcy_pressure->n_dofs());
  s.mu = {Eigen::VectorXd::Zero(d.lambda->n_dofs()), Eigen::VectorXd::Zero(d.lambda->n_dofs())};
  return s;
}

SchemeContext::SchemeContext(std::shared_ptr<const Discretization> disc, CoupledProblem problem, double dt)
    : disc_(std::move(disc)), problem_(std::move(problem)), dt_(dt) {
  problem_.params.validate();
  const Discretization& d = *disc_;
  stokes_ = assemble_stokes_blocks(problem_.params, dt, *d.fluid_velocity, *d.fluid_pressure, d.ops,
                                   problem_.fluid_bc);
  biot_ = assemble_biot_blocks(problem_.params, dt, *d.displacement, *d.darcy_velocity, *d.darcy_pressure,
                               *d.lambda, d.ops, problem_.poro_bc);
  fluid_mass_ = assemble_form({FormKind::VectorMass}, *d.fluid_velocity, *d.fluid_velocity, problem_.params);
}

const MonolithicSystem& SchemeContext::monolithic() const {
  if (mono_) return *mono_;
  const PhysicalParams& pr = problem_.params;
  if (pr.gamma_BJS > 0.0) throw std::invalid_argument("monolithic scheme supports gamma_BJS = 0 only");
  auto m = std::make_unique<MonolithicSystem>();
  m->rows = monolithic_constraint_rows(disc_->ops, pr, dt_);
  const StokesBlocks& S = stokes_;
  const BiotBlocks& B = biot_;
  const InterfaceOperators& ops = disc_->ops;
  const int nu = S.n_u(), npf = S.n_p(), ne = B.n_eta(), nq = B.n_q(), np = B.n_p();
  const int nl = disc_->lambda->n_dofs();
  m->off_pf = nu;
  m->off_eta = nu + npf;
  m->off_q = m->off_eta + ne;
  m->off_p = m->off_q + nq;
  m->off_mn = m->off_p + np;
  m->off_mt = m->off_mn + nl;
  m->size = m->off_mt + nl;

  const double g = pr.gamma_f + pr.gamma_p;
  const double dt = dt_;
  Triplets trip;
  add_block(trip, S.system, 0, 0);
  add_block(trip, ops.fluid_n, 0, m->off_mn, -1.0);
  add_block(trip, ops.fluid_t, 0, m->off_mt, -1.0);

  const int ob = m->off_eta;
  add_block(trip, B.system, ob, ob);
  // Biot rows see u_f through the combined Robin load <mu - 2 gamma u_f, .>.
  add_block(trip, SpMat(ops.disp_n * ops.trace_n + ops.disp_t * ops.trace_t), m->off_eta, 0, g / dt);
  add_block(trip, SpMat(ops.darcy_n * ops.trace_n), m->off_q, 0, g);
  add_block(trip, ops.disp_n, m->off_eta, m->off_mn, -1.0 / dt);
  add_block(trip, ops.disp_t, m->off_eta, m->off_mt, -1.0 / dt);
  add_block(trip, ops.darcy_n, m->off_q, m->off_mn, -1.0);

  // Constraint rows, negated so the mu couplings are symmetric.
  const SpMat& rn = m->rows.normal;
  const SpMat& rt = m->rows.tangential;
  add_block(trip, SpMat(rn.leftCols(nu)), m->off_mn, 0, -1.0);
  add_block(trip, SpMat(rn.middleCols(nu, ne)), m->off_mn, m->off_eta, -1.0);
  add_block(trip, SpMat(rn.rightCols(nq)), m->off_mn, m->off_q, -1.0);
  add_block(trip, SpMat(rt.leftCols(nu)), m->off_mt, 0, -1.0);
  add_block(trip, SpMat(rt.middleCols(nu, ne)), m->off_mt, m->off_eta, -1.0);

  m->matrix.resize(m->size, m->size);
  m->matrix.setFromTriplets(trip.begin(), trip.end());
  for (int d : S.essential) m->essential.push_back(d);
  for (int d : B.essential) m->essential.push_back(ob + d);
  m->constraints = EssentialConstraints(m->matrix, m->essential);
  m->solver = std::make_shared<DirectSolver>("monolithic");
  m->solver->factorize(m->constraints.matrix());
  mono_ = std::move(m);
  return *mono_;
}

namespace {

InterfaceFunction shear_if_needed(const SchemeContext& ctx, const Eigen::VectorXd& u, const Eigen::VectorXd& p,
                                  bool& have) {
  have = ctx.params().gamma_BJS > 0.0;
  if (!have) return {};
  const Discretization& d = ctx.disc();
  return fluid_shear(*d.lambda, ctx.params(), *d.fluid_velocity, u, *d.fluid_pressure, p);
}

// Loads of one step that do not depend on the Robin data or the new fluid velocity.
struct SweepBase {
  StokesRhs fluid;
  BiotRhs poro;
};

SweepBase sweep_base(const CoupledState& s, const SchemeContext& ctx) {
  const double t1 = s.t + ctx.dt();
  const CoupledProblem& pb = ctx.problem();
  const Discretization& d = ctx.disc();
  const int nl = d.lambda->n_dofs();
  const MuState zero{Eigen::VectorXd::Zero(nl), Eigen::VectorXd::Zero(nl)};
  SweepBase b;
  b.fluid = stokes_rhs(ctx.stokes(), s.u_f, zero, t1, pb.stokes);
  // The shear term is added per sweep; build the base as if gamma_BJS were 0.
  const BiotBlocks& B = ctx.biot();
  const BiotDataLoads dl = biot_data_loads(B, t1, pb.biot);
  b.poro.load = biot_history_load(B, {s.eta, s.dt_eta, s.p_p});
  b.poro.load.head(B.n_eta()) += dl.eta / ctx.dt();
  b.poro.load.segment(B.n_eta(), B.n_q()) += dl.q;
  b.poro.load.tail(B.n_p()) -= dl.p;
  b.poro.essential = biot_essential_values(B, t1, pb.biot);
  return b;
}

// One Stokes solve, one Biot solve and the mu update, with history from `s`
// and Robin data `mu`.
CoupledState split_sweep(const CoupledState& s, const MuState& mu, const SchemeContext& ctx, const SweepBase& base) {
  const Discretization& d = ctx.disc();
  StokesRhs fr = base.fluid;
  add_stokes_robin_load(ctx.stokes(), mu, fr.load);
  const StokesSolution fl = solve_stokes_step(ctx.stokes(), fr);
  bool bjs = false;
  const InterfaceFunction shear = shear_if_needed(ctx, fl.u, fl.p, bjs);
  BiotRhs br = base.poro;
  add_biot_interface_load(ctx.biot(), mu, fl.u, bjs ? &shear : nullptr, br.load);
  const BiotSolution st = solve_biot_step(ctx.biot(), br);
  CoupledState out;
  out.t = s.t + ctx.dt();
  out.u_f = fl.u;
  out.p_f = fl.p;
  out.eta = st.eta;
  out.dt_eta = (st.eta - s.eta) / ctx.dt();
  out.u_p = st.u;
  out.p_p = st.p;
  out.mu = update_mu(*d.lambda, d.ops, mu, out.u_f, out.u_p, out.dt_eta, ctx.params(), bjs ? &shear : nullptr);
  return out;
}

}  // namespace

CoupledState step_noniterative(const CoupledState& s, const SchemeContext& ctx) {
  try {
    return split_sweep(s, s.mu, ctx, sweep_base(s, ctx));
  } catch (const std::exception& e) {
    throw std::runtime_error("non-iterative step at t = " + std::to_string(s.t + ctx.dt()) + ": " + e.what());
  }
}

IterativeResult step_iterative(const CoupledState& s, const SchemeContext& ctx, const IterationControl& ctl) {
  if (!(ctl.eps > 0.0) && !ctl.fixed) throw std::invalid_argument("iterative scheme: eps must be positive");
  if (ctl.k_max < 1) throw std::invalid_argument("iterative scheme: k_max must be at least 1");
  const Discretization& d = ctx.disc();
  IterativeResult r;
  const SweepBase base = sweep_base(s, ctx);
  MuState mu = s.mu;
  Eigen::VectorXd trace_prev = d.ops.trace_n * s.u_f;
  for (int k = 1; k <= ctl.k_max; ++k) {
    try {
      r.state = split_sweep(s, mu, ctx, base);
    } catch (const std::exception& e) {
      throw std::runtime_error("iterative step at t = " + std::to_string(s.t + ctx.dt()) + ", iteration " +
                               std::to_string(k) + ": " + e.what());
    }
    mu = r.state.mu;
    const Eigen::VectorXd trace = d.ops.trace_n * r.state.u_f;
    r.last_change = d.lambda->l2_norm(trace - trace_prev);
    trace_prev = trace;
    r.iterations = k;
    if (ctl.on_iteration) ctl.on_iteration(k, r.last_change);
    if (!ctl.fixed && r.last_change < ctl.eps) {
      r.converged = true;
      break;
    }
  }
  if (ctl.fixed) r.converged = true;
  return r;
}

CoupledState step_monolithic(const CoupledState& s, const SchemeContext& ctx) {
  const MonolithicSystem& m = ctx.monolithic();
  const double t1 = s.t + ctx.dt();
  const CoupledProblem& pb = ctx.problem();
  const StokesBlocks& S = ctx.stokes();
  const BiotBlocks& B = ctx.biot();
  const int nl = ctx.disc().lambda->n_dofs();
  const MuState zero{Eigen::VectorXd::Zero(nl), Eigen::VectorXd::Zero(nl)};

  Eigen::VectorXd b = Eigen::VectorXd::Zero(m.size);
  const StokesRhs fr = stokes_rhs(S, s.u_f, zero, t1, pb.stokes);
  b.head(S.size()) = fr.load;
  const BiotRhs br = biot_rhs(B, {s.eta, s.dt_eta, s.p_p}, zero, Eigen::VectorXd::Zero(S.n_u()), t1, pb.biot);
  b.segment(m.off_eta, B.size()) = br.load;
  b.segment(m.off_mn, nl) = -m.rows.rhs_normal(s.eta);
  b.segment(m.off_mt, nl) = -m.rows.rhs_tangential(s.eta);

  Eigen::VectorXd g(static_cast<Eigen::Index>(m.essential.size()));
  g << fr.essential, br.essential;
  Eigen::VectorXd x;
  try {
    x = m.solver->solve(m.constraints.lift(b, g));
  } catch (const std::exception& e) {
    throw std::runtime_error("monolithic step at t = " + std::to_string(t1) + ": " + e.what());
  }
  CoupledState out;
  out.t = t1;
  out.u_f = x.head(S.n_u());
  out.p_f = x.segment(m.off_pf, S.n_p());
  out.eta = x.segment(m.off_eta, B.n_eta());
  out.dt_eta = (out.eta - s.eta) / ctx.dt();
  out.u_p = x.segment(m.off_q, B.n_q());
  out.p_p = x.segment(m.off_p, B.n_p());
  out.mu = {x.segment(m.off_mn, nl), x.segment(m.off_mt, nl)};
  return out;
}

namespace {

double quad(const SpMat& A, const Eigen::VectorXd& x) { return x.dot(A * x); }

void require_equal_gamma(const PhysicalParams& p) {
  if (p.gamma_f != p.gamma_p) throw std::invalid_argument("energy diagnostics require gamma_f == gamma_p");
}

}  // namespace

double stored_energy(const SchemeContext& ctx, const CoupledState& s, bool with_mu) {
  const PhysicalParams& p = ctx.params();
  const BiotBlocks& B = ctx.biot();
  const double rho_f = p.quasistatic_fluid ? 0.0 : p.rho_f;
  double E = 0.5 * rho_f * quad(ctx.fluid_mass(), s.u_f) + 0.5 * p.rho_p * quad(B.mass_eta, s.dt_eta) +
             0.5 * quad(B.elastic, s.eta) + 0.5 * p.s0 * quad(B.mass_p, s.p_p);
  if (with_mu) {
    require_equal_gamma(p);
    const LambdaSpace& L = *ctx.disc().lambda;
    E += ctx.dt() / (4.0 * p.gamma_f) * (quad(L.mass(), s.mu.n) + quad(L.mass(), s.mu.tau));
  }
  return E;
}

EnergyReport energy_diagnostics(const SchemeContext& ctx, const CoupledState& state, const CoupledState& prev,
                                bool with_mu) {
  const PhysicalParams& p = ctx.params();
  const BiotBlocks& B = ctx.biot();
  const double rho_f = p.quasistatic_fluid ? 0.0 : p.rho_f;
  EnergyReport r;
  r.E = stored_energy(ctx, state, with_mu);
  r.D = quad(ctx.stokes().stiffness, state.u_f) + quad(B.darcy, state.u_p);
  r.S = 0.5 * p.rho_p * quad(B.mass_eta, state.dt_eta - prev.dt_eta) +
        0.5 * rho_f * quad(ctx.fluid_mass(), state.u_f - prev.u_f) + 0.5 * quad(B.elastic, state.eta - prev.eta) +
        0.5 * p.s0 * quad(B.mass_p, state.p_p - prev.p_p);
  return r;
}

std::pair<double, double> stokes_energy_identity(const SchemeContext& ctx, const CoupledState& prev,
                                                 const Eigen::VectorXd& u_new) {
  const PhysicalParams& p = ctx.params();
  require_equal_gamma(p);
  const StokesBlocks& S = ctx.stokes();
  const Discretization& d = ctx.disc();
  const double lhs = (u_new - prev.u_f).dot(S.mass * u_new) + quad(S.stiffness, u_new);
  const double g = p.gamma_f;
  const SpMat& M = d.lambda->mass();
  const Eigen::VectorXd un = d.ops.trace_n * u_new, ut = d.ops.trace_t * u_new;
  const double rhs = (quad(M, prev.mu.n) - quad(M, prev.mu.n - 2.0 * g * un) + quad(M, prev.mu.tau) -
                      quad(M, prev.mu.tau - 2.0 * g * ut)) /
                     (4.0 * g);
  return {lhs, rhs};
}

double interface_residual(const SchemeContext& ctx, const CoupledState& s) {
  const Discretization& d = ctx.disc();
  const Eigen::VectorXd r = continuity_residual(d.ops, s.u_f, s.dt_eta, s.u_p);
  const int nl = d.lambda->n_dofs();
  const Eigen::VectorXd rn = r.head(nl), rt = r.tail(nl);
  return std::sqrt(std::max(0.0, rn.dot(d.lambda->solve_mass(rn)) + rt.dot(d.lambda->solve_mass(rt))));
}

RunSummary run(const SchemeContext& ctx, const CoupledState& ic, double T, const RunOptions& opt,
               const std::vector<StepObserver>& observers) {
  const double dt = ctx.dt();
  const double ratio = T / dt;
  const int N = static_cast<int>(std::lround(ratio));
  if (N < 0 || std::abs(ratio - N) > 1e-8 * std::max(1.0, ratio)) {
    throw std::invalid_argument("T / dt must be a nonnegative integer (T = " + std::to_string(T) +
                                ", dt = " + std::to_string(dt) + ")");
  }
  const bool with_mu = opt.scheme != SchemeKind::Monolithic;
  const bool energies = opt.energies && ctx.params().gamma_f == ctx.params().gamma_p;

  RunSummary sum;
  CoupledState s = ic;
  StepRecord rec0;
  rec0.t = s.t;
  if (energies) {
    rec0.energy.E = stored_energy(ctx, s, with_mu);
    rec0.energy.D = quad(ctx.stokes().stiffness, s.u_f) + quad(ctx.biot().darcy, s.u_p);
  }
  rec0.interface_residual = interface_residual(ctx, s);
  sum.E0 = sum.EN = rec0.energy.E;
  for (const auto& obs : observers) obs(s, rec0);

  long total_iters = 0;
  for (int n = 1; n <= N; ++n) {
    StepRecord rec;
    rec.step = n;
    CoupledState next;
    switch (opt.scheme) {
      case SchemeKind::NonIterative:
        next = step_noniterative(s, ctx);
        rec.iterations = 1;
        break;
      case SchemeKind::Iterative: {
        IterativeResult ir = step_iterative(s, ctx, opt.iteration);
        next = std::move(ir.state);
        rec.iterations = ir.iterations;
        rec.converged = ir.converged;
        if (!ir.converged) ++sum.not_converged;
        break;
      }
      case SchemeKind::Monolithic:
        next = step_monolithic(s, ctx);
        rec.iterations = 1;
        break;
    }
    // Pin the clock to n * dt to avoid drift.
    next.t = ic.t + n * dt;
    rec.t = next.t;
    total_iters += rec.iterations;
    if (energies) {
      rec.energy = energy_diagnostics(ctx, next, s, with_mu);
      sum.sum_D += dt * rec.energy.D;
      sum.sum_S += rec.energy.S;
      sum.EN = rec.energy.E;
    }
    rec.interface_residual = interface_residual(ctx, next);
    s = std::move(next);
    for (const auto& obs : observers) obs(s, rec);
  }
  sum.steps = N;
  sum.average_iterations = N > 0 ? static_cast<double>(total_iters) / N : 0.0;
  sum.final_state = std::move(s);
  return sum;
}

void write_jsonl(std::ostream& os, const StepRecord& r) {
  nlohmann::json j;
  j["step"] = r.step;
  j["t"] = r.t;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["E"] = r.energy.E;
  j["D"] = r.energy.D;
  j["S"] = r.energy.S;
  j["interface_residual"] = r.interface_residual;
  os << j.dump() << '\n';
}

}  // namespace fpsi
