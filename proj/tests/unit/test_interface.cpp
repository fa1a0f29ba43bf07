#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "fixtures.hpp"
#include "fpsi/fem/quadrature.hpp"

using namespace fpsi;
using fpsi::testing::example1_disc;
using fpsi::testing::random_vector;

namespace {

// Integrates f(k, s, X) over the interface with a 5-point Gauss rule per segment.
template <class F>
double integrate_interface(const LambdaSpace& L, F f) {
  const LineRule line = gauss_line(5);
  double s = 0.0;
  for (int k = 0; k < L.interface().n_segments(); ++k) {
    const InterfaceSegment& seg = L.interface().segments[k];
    for (int q = 0; q < line.size(); ++q) {
      const Point2 X = seg.a + line.points[q] * (seg.b - seg.a);
      s += line.weights[q] * seg.length() * f(k, line.points[q], X);
    }
  }
  return s;
}

std::array<double, 2> field_at(const LambdaSpace& L, const DofMap& V, InterfaceSide side, const Eigen::VectorXd& x,
                               int k, Point2 X) {
  const auto [cell, xh] = L.locate(V, side, k, X);
  return V.eval_field(x, cell, xh).value;
}

}  // namespace

TEST(LambdaSpace, NodesFollowArcOrder) {
  const auto d = example1_disc(4);
  const LambdaSpace& L = *d->lambda;
  EXPECT_EQ(L.n_dofs(), 9);
  for (int i = 1; i < L.n_dofs(); ++i) EXPECT_GT(L.node_arc(i), L.node_arc(i - 1));
  EXPECT_NEAR(L.node_point(0).x, 0.0, 1e-15);
  EXPECT_NEAR(L.node_point(8).x, 1.0, 1e-15);
  EXPECT_NEAR(L.node_point(1).x, 0.125, 1e-15);
}

TEST(LambdaSpace, MassIsSymmetricPositiveDefiniteAndIntegratesOne) {
  const auto d = example1_disc(4);
  const Eigen::MatrixXd M(d->lambda->mass());
  EXPECT_LT((M - M.transpose()).norm(), 1e-15);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
  EXPECT_NEAR(M.sum(), 1.0, 1e-14);
}

TEST(LambdaSpace, ProjectionOfConstantIsConstant) {
  const auto d = example1_disc(4);
  const Eigen::VectorXd c = d->lambda->project([](int, Point2) { return 2.5; });
  for (int i = 0; i < c.size(); ++i) EXPECT_NEAR(c[i], 2.5, 1e-12);
}

TEST(LambdaSpace, ProjectionReproducesQuadratics) {
  const auto d = example1_disc(4);
  const LambdaSpace& L = *d->lambda;
  const Eigen::VectorXd c = L.project([](int, Point2 x) { return x.x * x.x - 0.3 * x.x; });
  for (int i = 0; i < c.size(); ++i) {
    const double x = L.node_point(i).x;
    EXPECT_NEAR(c[i], x * x - 0.3 * x, 1e-12);
  }
}

TEST(LambdaSpace, ProjectionIsIdempotent) {
  const auto d = example1_disc(4);
  const LambdaSpace& L = *d->lambda;
  const InterfaceFunction g = [](int, Point2 x) { return std::exp(x.x) * std::sin(5.0 * x.x); };
  const Eigen::VectorXd once = L.project(g);
  const Eigen::VectorXd twice = L.project(L.as_function(once));
  EXPECT_LT((once - twice).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(LambdaSpace, ProjectionIsOrthogonal) {
  const auto d = example1_disc(4);
  const LambdaSpace& L = *d->lambda;
  const InterfaceFunction g = [](int, Point2 x) { return std::cos(7.0 * x.x) + x.x; };
  const Eigen::VectorXd Pg = L.project(g);
  for (unsigned seed = 1; seed <= 3; ++seed) {
    const Eigen::VectorXd chi = random_vector(L.n_dofs(), seed);
    const double lhs = integrate_interface(L, [&](int k, double s, Point2) { return L.value(Pg, k, s) * L.value(chi, k, s); });
    const double rhs = integrate_interface(L, [&](int k, double s, Point2 X) { return g(k, X) * L.value(chi, k, s); });
    EXPECT_NEAR(lhs, rhs, 1e-12);
  }
}

TEST(LambdaSpace, UnitLoadGivesEdgeRowSums) {
  // <1, v . n_f> for the vertical velocity component: h/6 per edge at vertices, 2h/3 at midpoints.
  const auto d = example1_disc(4);
  const LambdaSpace& L = *d->lambda;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(L.n_dofs());
  const Eigen::VectorXd load = d->ops.fluid_n * ones;
  const int nn = d->fluid_velocity->n_scalar_nodes();
  const double h = 0.25;
  for (int i = 0; i < L.n_dofs(); ++i) {
    const int dof = nn + L.fluid_node(i);
    double expected = (i % 2 == 1) ? 2.0 * h / 3.0 : (i == 0 || i == L.n_dofs() - 1 ? h / 6.0 : h / 3.0);
    EXPECT_NEAR(load[dof], -expected, 1e-14) << "node " << i;  // n_f = (0, -1)
  }
  EXPECT_NEAR(load.sum(), -1.0, 1e-14);
}

TEST(LambdaSpace, FluidTraceMatchesWeakTrace) {
  // Fluid traces lie in the trace space, so M^{-1} F^T u equals the nodal trace.
  const auto d = example1_disc(4);
  const LambdaSpace& L = *d->lambda;
  const Eigen::VectorXd u = random_vector(d->fluid_velocity->n_dofs(), 7);
  const Eigen::VectorXd weak = L.solve_mass(d->ops.fluid_n.transpose() * u);
  const Eigen::VectorXd nodal = d->ops.trace_n * u;
  EXPECT_LT((weak - nodal).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(UpdateMu, ZeroVelocitiesLeaveMuUnchanged) {
  const auto d = example1_disc(4);
  const int nl = d->lambda->n_dofs();
  const MuState mu{random_vector(nl, 1), random_vector(nl, 2)};
  const MuState out = update_mu(*d->lambda, d->ops, mu, Eigen::VectorXd::Zero(d->fluid_velocity->n_dofs()),
                                Eigen::VectorXd::Zero(d->darcy_velocity->n_dofs()),
                                Eigen::VectorXd::Zero(d->displacement->n_dofs()), PhysicalParams{});
  EXPECT_LT((out.n - mu.n).norm(), 1e-14);
  EXPECT_LT((out.tau - mu.tau).norm(), 1e-14);
}

TEST(UpdateMu, ConstantTraceShiftsByTwiceTheConstant) {
  const auto d = example1_disc(4);
  const int nl = d->lambda->n_dofs();
  const double c = 0.7;
  const MuState mu{random_vector(nl, 3), random_vector(nl, 4)};
  const Eigen::VectorXd u_f =
      d->fluid_velocity->interpolate(VectorFunction([&](Point2) { return std::array<double, 2>{0.0, -c}; }));
  const MuState out = update_mu(*d->lambda, d->ops, mu, u_f, Eigen::VectorXd::Zero(d->darcy_velocity->n_dofs()),
                                Eigen::VectorXd::Zero(d->displacement->n_dofs()), PhysicalParams{});
  for (int i = 0; i < nl; ++i) {
    EXPECT_NEAR(out.n[i], mu.n[i] - 2.0 * c, 1e-12);
    EXPECT_NEAR(out.tau[i], mu.tau[i], 1e-12);
  }
}

TEST(UpdateMu, WeakFormMatchesDenseProjectionOracle) {
  const auto d = example1_disc(4);
  const LambdaSpace& L = *d->lambda;
  PhysicalParams pr;
  pr.gamma_f = pr.gamma_p = 0.8;
  const int nl = L.n_dofs();
  const MuState mu{random_vector(nl, 11), random_vector(nl, 12)};
  const Eigen::VectorXd u_f = random_vector(d->fluid_velocity->n_dofs(), 13);
  const Eigen::VectorXd u_p = random_vector(d->darcy_velocity->n_dofs(), 14);
  const Eigen::VectorXd v = random_vector(d->displacement->n_dofs(), 15);

  const MuState weak = update_mu(L, d->ops, mu, u_f, u_p, v, pr);
  const Eigen::MatrixXd Minv = Eigen::MatrixXd(L.mass()).inverse();
  const auto& o = d->ops;
  const Eigen::VectorXd n = mu.n - 1.6 * Minv * (Eigen::MatrixXd(o.fluid_n).transpose() * u_f +
                                                Eigen::MatrixXd(o.disp_n).transpose() * v +
                                                Eigen::MatrixXd(o.darcy_n).transpose() * u_p);
  const Eigen::VectorXd t =
      mu.tau - 1.6 * Minv * (Eigen::MatrixXd(o.fluid_t).transpose() * u_f + Eigen::MatrixXd(o.disp_t).transpose() * v);
  EXPECT_LT((weak.n - n).lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_LT((weak.tau - t).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(UpdateMu, WeakAndProjectedFormsAgree) {
  const auto d = example1_disc(4);
  const LambdaSpace& L = *d->lambda;
  PhysicalParams pr;
  pr.gamma_f = pr.gamma_p = 2.0;
  const int nl = L.n_dofs();
  const MuState mu{random_vector(nl, 21), random_vector(nl, 22)};
  const Eigen::VectorXd u_f = random_vector(d->fluid_velocity->n_dofs(), 23);
  const Eigen::VectorXd u_p = random_vector(d->darcy_velocity->n_dofs(), 24);
  const Eigen::VectorXd eta = random_vector(d->displacement->n_dofs(), 25);
  const Eigen::VectorXd v = random_vector(d->displacement->n_dofs(), 26);
  const Eigen::VectorXd p = random_vector(d->darcy_pressure->n_dofs(), 27);
  const PoroFields poro{*d->displacement, *d->darcy_velocity, *d->darcy_pressure, eta, v, u_p, p};
  const MuState weak = update_mu(L, d->ops, mu, u_f, u_p, v, pr);
  const MuState proj = update_mu_projected(L, d->ops, mu, u_f, poro, pr);
  EXPECT_LT((weak.n - proj.n).lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_LT((weak.tau - proj.tau).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(UpdateMu, RejectsSizeMismatch) {
  const auto d = example1_disc(2);
  const MuState mu{Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)};
  EXPECT_THROW(update_mu(*d->lambda, d->ops, mu, Eigen::VectorXd::Zero(d->fluid_velocity->n_dofs()),
                         Eigen::VectorXd::Zero(d->darcy_velocity->n_dofs()),
                         Eigen::VectorXd::Zero(d->displacement->n_dofs()), PhysicalParams{}),
               std::invalid_argument);
}

TEST(StressTrace, ElasticStressOfUniaxialStretch) {
  const auto d = example1_disc(2);
  const Eigen::VectorXd eta =
      d->displacement->interpolate(VectorFunction([](Point2 x) { return std::array<double, 2>{x.x, 0.0}; }));
  const TractionTrace tr = stress_trace(*d->lambda, StressKind::Elastic, PhysicalParams{}, *d->displacement, eta,
                                        nullptr, nullptr);
  const auto s = tr(0, {0.3, 0.0});
  EXPECT_NEAR(s[0], 0.0, 1e-13);
  EXPECT_NEAR(s[1], 1.0, 1e-13);
}

TEST(StressTrace, PressureOnlyStresses) {
  const auto d = example1_disc(2);
  const double c = 3.0;
  const Eigen::VectorXd u0 = Eigen::VectorXd::Zero(d->fluid_velocity->n_dofs());
  const Eigen::VectorXd pf = Eigen::VectorXd::Constant(d->fluid_pressure->n_dofs(), c);
  const auto sf = stress_trace(*d->lambda, StressKind::Fluid, PhysicalParams{}, *d->fluid_velocity, u0,
                               d->fluid_pressure.get(), &pf)(1, {0.7, 0.0});
  EXPECT_NEAR(sf[0], 0.0, 1e-13);
  EXPECT_NEAR(sf[1], c, 1e-13);  // -c n_f with n_f = (0, -1)

  const Eigen::VectorXd eta0 = Eigen::VectorXd::Zero(d->displacement->n_dofs());
  const Eigen::VectorXd pp = d->darcy_pressure->interpolate(ScalarFunction([&](Point2) { return c; }));
  const auto sp = stress_trace(*d->lambda, StressKind::Poro, PhysicalParams{}, *d->displacement, eta0,
                               d->darcy_pressure.get(), &pp)(0, {0.2, 0.0});
  EXPECT_NEAR(sp[0], 0.0, 1e-13);
  EXPECT_NEAR(sp[1], -c, 1e-13);  // -c n_p with n_p = (0, 1)
}

TEST(StressTrace, RejectsWrongSide) {
  const auto d = example1_disc(2);
  const Eigen::VectorXd u0 = Eigen::VectorXd::Zero(d->fluid_velocity->n_dofs());
  const Eigen::VectorXd pf = Eigen::VectorXd::Zero(d->fluid_pressure->n_dofs());
  EXPECT_ANY_THROW(stress_trace(*d->lambda, StressKind::Poro, PhysicalParams{}, *d->fluid_velocity, u0,
                                d->fluid_pressure.get(), &pf));
  EXPECT_ANY_THROW(stress_trace(*d->lambda, StressKind::Fluid, PhysicalParams{}, *d->fluid_velocity, u0, nullptr,
                                nullptr));
}

TEST(InitMu, RestStateGivesZero) {
  const auto d = example1_disc(2);
  const CoupledState s = zero_state(*d);
  const PoroFields poro{*d->displacement, *d->darcy_velocity, *d->darcy_pressure, s.eta, s.dt_eta, s.u_p, s.p_p};
  const MuState mu = init_mu_discrete(*d->lambda, poro, PhysicalParams{});
  EXPECT_EQ(mu.n.norm(), 0.0);
  EXPECT_EQ(mu.tau.norm(), 0.0);
}

TEST(InitMu, DiscreteMatchesClosedFormRobinData) {
  const auto d = example1_disc(16);
  const ManufacturedSolution ex;
  const double t = 0.3;
  const CoupledState s = example1_initial_state(*d, ex, t);
  const PoroFields poro{*d->displacement, *d->darcy_velocity, *d->darcy_pressure, s.eta, s.dt_eta, s.u_p, s.p_p};
  const MuState disc = init_mu_discrete(*d->lambda, poro, ex.params());
  const double scale = d->lambda->l2_norm(s.mu.n) + d->lambda->l2_norm(s.mu.tau);
  EXPECT_LT(d->lambda->l2_norm(disc.n - s.mu.n) / scale, 2e-2);
  EXPECT_LT(d->lambda->l2_norm(disc.tau - s.mu.tau) / scale, 2e-2);
}

TEST(InitMu, TangentialDataAtTimeZero) {
  // dt_eta(0) = pi (cos y - 3x, y + 1) and eta(0) = 0, so mu_t = -gamma_f dt_eta . tau_p = pi (1 - 3x) on y = 0.
  const auto d = example1_disc(8);
  const CoupledState s = example1_initial_state(*d, ManufacturedSolution{});
  const LambdaSpace& L = *d->lambda;
  for (int i = 0; i < L.n_dofs(); ++i) {
    const double x = L.node_point(i).x;
    EXPECT_NEAR(s.mu.tau[i], std::numbers::pi * (1.0 - 3.0 * x), 1e-12);
  }
}

TEST(ConstraintRows, ExactContinuityHasZeroResidual) {
  const auto d = example1_disc(4);
  PhysicalParams pr;
  const double dt = 0.1;
  const ConstraintRows rows = monolithic_constraint_rows(d->ops, pr, dt);
  const auto vec = [](double a, double b) { return VectorFunction([=](Point2) { return std::array<double, 2>{a, b}; }); };
  const Eigen::VectorXd u_f = d->fluid_velocity->interpolate(vec(0.4, 1.0));
  const Eigen::VectorXd eta_prev = random_vector(d->displacement->n_dofs(), 31);
  const Eigen::VectorXd v = d->displacement->interpolate(vec(0.4, 0.25));
  const Eigen::VectorXd u_p = d->darcy_velocity->interpolate(vec(0.0, 0.75));
  const Eigen::VectorXd eta = eta_prev + dt * v;
  Eigen::VectorXd x(rows.n_uf + rows.n_eta + rows.n_up);
  x << u_f, eta, u_p;
  EXPECT_LT((rows.normal * x - rows.rhs_normal(eta_prev)).lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_LT((rows.tangential * x - rows.rhs_tangential(eta_prev)).lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_LT(continuity_residual(d->ops, u_f, v, u_p).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(ConstraintRows, ConstantMismatchGivesMassRowSums) {
  const auto d = example1_disc(4);
  const double c = 0.3;
  const Eigen::VectorXd u_f = d->fluid_velocity->interpolate(
      VectorFunction([&](Point2) { return std::array<double, 2>{0.0, -c}; }));  // u_f . n_f = c
  const Eigen::VectorXd r = continuity_residual(d->ops, u_f, Eigen::VectorXd::Zero(d->displacement->n_dofs()),
                                                Eigen::VectorXd::Zero(d->darcy_velocity->n_dofs()));
  const int nl = d->lambda->n_dofs();
  const Eigen::VectorXd row_sums = d->lambda->mass() * Eigen::VectorXd::Ones(nl);
  EXPECT_LT((r.head(nl) - c * row_sums).lpNorm<Eigen::Infinity>(), 1e-14);
  EXPECT_LT(r.tail(nl).lpNorm<Eigen::Infinity>(), 1e-14);
}

TEST(ConstraintRows, MatchQuadratureOracle) {
  const auto d = example1_disc(4);
  const LambdaSpace& L = *d->lambda;
  const Eigen::VectorXd u_f = random_vector(d->fluid_velocity->n_dofs(), 41);
  const Eigen::VectorXd v = random_vector(d->displacement->n_dofs(), 42);
  const Eigen::VectorXd u_p = random_vector(d->darcy_velocity->n_dofs(), 43);
  const Eigen::VectorXd chi = random_vector(L.n_dofs(), 44);
  const Eigen::VectorXd r = continuity_residual(d->ops, u_f, v, u_p);
  const int nl = L.n_dofs();
  const double normal = integrate_interface(L, [&](int k, double s, Point2 X) {
    const auto uf = field_at(L, *d->fluid_velocity, InterfaceSide::Fluid, u_f, k, X);
    const auto ve = field_at(L, *d->displacement, InterfaceSide::Poro, v, k, X);
    const auto up = field_at(L, *d->darcy_velocity, InterfaceSide::Poro, u_p, k, X);
    return L.value(chi, k, s) * (ve[1] + up[1] - uf[1]);
  });
  const double tangential = integrate_interface(L, [&](int k, double s, Point2 X) {
    const auto uf = field_at(L, *d->fluid_velocity, InterfaceSide::Fluid, u_f, k, X);
    const auto ve = field_at(L, *d->displacement, InterfaceSide::Poro, v, k, X);
    return L.value(chi, k, s) * (uf[0] - ve[0]);
  });
  EXPECT_NEAR(chi.dot(r.head(nl)), normal, 1e-12);
  EXPECT_NEAR(chi.dot(r.tail(nl)), tangential, 1e-12);
}

TEST(ConstraintRows, RequireEqualRobinParameters) {
  const auto d = example1_disc(2);
  PhysicalParams pr;
  pr.gamma_f = 1.0;
  pr.gamma_p = 2.0;
  EXPECT_ANY_THROW(monolithic_constraint_rows(d->ops, pr, 0.1));
}

TEST(MuCsv, OneRowPerNode) {
  const auto d = example1_disc(2);
  const int nl = d->lambda->n_dofs();
  std::ostringstream os;
  write_mu_csv(os, *d->lambda, {Eigen::VectorXd::Ones(nl), Eigen::VectorXd::Zero(nl)}, 0.5, true);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "t,arc,x,y,mu_n,mu_tau");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, nl);
}
