#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "fpsi/fem/assembly.hpp"
#include "fpsi/fem/dofmap.hpp"
#include "fpsi/fem/linear.hpp"
#include "fpsi/fem/quadrature.hpp"

using namespace fpsi;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

std::shared_ptr<const TriMesh> unit_square(int n, DiagonalRule rule = DiagonalRule::LowerLeft) {
  using namespace predicates;
  return std::make_shared<const TriMesh>(tag_boundaries(build_rect_mesh(0, 1, 0, 1, n, n, rule),
                                                        {{on_line_y(1.0), BoundaryTag::FluidDirichlet},
                                                         {on_line_x(0.0), BoundaryTag::FluidNeumann},
                                                         {on_line_x(1.0), BoundaryTag::FluidNeumann},
                                                         {on_line_y(0.0), BoundaryTag::Interface}}));
}

// Single right triangle (0,0), (1,0), (0,1) with one tagged edge on y = 0.
std::shared_ptr<const TriMesh> reference_triangle() {
  TriMesh m;
  m.vertices = {{0, 0}, {1, 0}, {0, 1}};
  m.triangles = {{0, 1, 2}};
  m.edges = {{{0, 1}, {0, -1}}, {{1, 2}, {0, -1}}, {{0, 2}, {0, -1}}};
  m.triangle_edges = {{0, 1, 2}};
  m.edge_tags = {BoundaryTag::Interface, BoundaryTag::FluidNeumann, BoundaryTag::FluidNeumann};
  return std::make_shared<const TriMesh>(m);
}

Eigen::MatrixXd dense(const SpMat& A) { return Eigen::MatrixXd(A); }

}  // namespace

TEST(Quadrature, WeightsSumToHalf) {
  for (int d = 1; d <= 8; ++d) {
    const QuadratureRule q = quadrature(d);
    double s = 0.0;
    for (double w : q.weights) s += w;
    EXPECT_NEAR(s, 0.5, 1e-15);
    EXPECT_EQ(q.exactness_degree, d);
  }
}

TEST(Quadrature, ExactOnFullMonomialBasis) {
  for (int d = 1; d <= 8; ++d) {
    const QuadratureRule q = quadrature(d);
    for (int a = 0; a <= d; ++a) {
      for (int b = 0; a + b <= d; ++b) {
        double s = 0.0;
        for (int i = 0; i < q.size(); ++i) s += q.weights[i] * std::pow(q.points[i][0], a) * std::pow(q.points[i][1], b);
        const double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
        EXPECT_NEAR(s, exact, 1e-15) << "degree " << d << " monomial x^" << a << " y^" << b;
      }
    }
  }
}

TEST(Quadrature, ClosedFormExamples) {
  auto integrate = [](const QuadratureRule& q, auto f) {
    double s = 0.0;
    for (int i = 0; i < q.size(); ++i) s += q.weights[i] * f(q.points[i][0], q.points[i][1]);
    return s;
  };
  EXPECT_NEAR(integrate(quadrature(1), [](double, double) { return 1.0; }), 0.5, 1e-15);
  EXPECT_NEAR(integrate(quadrature(1), [](double x, double) { return x; }), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(integrate(quadrature(4), [](double x, double y) { return x * x * y * y; }), 1.0 / 180.0, 1e-15);
}

TEST(Quadrature, UnsupportedDegree) {
  EXPECT_THROW(quadrature(0), std::invalid_argument);
  EXPECT_THROW(quadrature(9), std::invalid_argument);
}

TEST(Quadrature, LineRuleExactness) {
  for (int n = 1; n <= 6; ++n) {
    const LineRule g = gauss_line(n);
    for (int p = 0; p <= 2 * n - 1; ++p) {
      double s = 0.0;
      for (int i = 0; i < g.size(); ++i) s += g.weights[i] * std::pow(g.points[i], p);
      EXPECT_NEAR(s, 1.0 / (p + 1), 1e-15);
    }
  }
}

TEST(Basis, P1IndicatorAtVertices) {
  const auto m = reference_triangle();
  const std::array<std::array<double, 2>, 3> verts{{{0, 0}, {1, 0}, {0, 1}}};
  for (int v = 0; v < 3; ++v) {
    const BasisEval b = eval_basis(ElementFamily::P1c, *m, 0, verts[v]);
    for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(b.value[i][0], i == v ? 1.0 : 0.0);
  }
}

TEST(Basis, DegenerateCellRejected) {
  TriMesh m;
  m.vertices = {{0, 0}, {1, 0}, {2, 0}};
  m.triangles = {{0, 1, 2}};
  EXPECT_THROW(CellGeometry::from_mesh(m, 0), DegenerateCellError);
}

TEST(Basis, RT0DivergenceConstantPerCell) {
  const auto m = unit_square(3, DiagonalRule::Alternating);
  DofMap rt(m, ElementFamily::RT0);
  const QuadratureRule q = quadrature(4);
  for (int c = 0; c < rt.n_cells(); ++c) {
    BasisEval b0, b;
    rt.eval(c, q.points[0], b0);
    for (int p = 1; p < q.size(); ++p) {
      rt.eval(c, q.points[p], b);
      for (int i = 0; i < 3; ++i) EXPECT_NEAR(b.div[i], b0.div[i], 1e-12);
    }
  }
}

TEST(Basis, P2ReproducesQuadratics) {
  const auto m = unit_square(4, DiagonalRule::Alternating);
  DofMap p2(m, ElementFamily::P2c);
  const Eigen::VectorXd x = p2.interpolate(ScalarFunction([](Point2 p) { return p.x * p.x; }));
  for (int c = 0; c < p2.n_cells(); ++c) {
    const Point2 cen = p2.geometry(c).centroid();
    EXPECT_NEAR(p2.eval_field(x, c, {1.0 / 3.0, 1.0 / 3.0}).value[0], cen.x * cen.x, 1e-14);
  }
}

TEST(Basis, RTInterpolationReproducesLocalSpace) {
  const auto m = unit_square(3, DiagonalRule::Alternating);
  DofMap rt1(m, ElementFamily::RT1);
  // (1 + x + 2y + x^2 - y x, 3 - y + x y - y^2) lies in RT1 = P1^2 + x P1.
  const VectorFunction f = [](Point2 p) {
    const double a = 0.5, b = -1.0;  // x * (a x + b y)
    return std::array<double, 2>{1 + p.x + 2 * p.y + p.x * (a * p.x + b * p.y),
                                 3 - p.y + p.y * (a * p.x + b * p.y)};
  };
  const Eigen::VectorXd x = rt1.interpolate(f);
  const QuadratureRule q = quadrature(3);
  for (int c = 0; c < rt1.n_cells(); ++c) {
    for (int i = 0; i < q.size(); ++i) {
      const Point2 pt = rt1.geometry(c).map(q.points[i][0], q.points[i][1]);
      const auto v = rt1.eval_field(x, c, q.points[i]).value;
      EXPECT_NEAR(v[0], f(pt)[0], 1e-12);
      EXPECT_NEAR(v[1], f(pt)[1], 1e-12);
    }
  }
}

TEST(Assembly, P1MassOnReferenceCell) {
  const auto m = reference_triangle();
  DofMap p1(m, ElementFamily::P1c);
  const SpMat M = assemble_form({FormKind::ScalarMass}, p1, p1, PhysicalParams{});
  Eigen::Matrix3d expected;
  expected << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  expected /= 24.0;
  EXPECT_LT((dense(M) - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Assembly, InterfaceP2TraceMass) {
  // Normal mass on y = 0 of one triangle: only the y-components of the
  // three P2 nodes on that edge are involved.
  const auto m = reference_triangle();
  DofMap v(m, ElementFamily::VecP2c);
  const SpMat G = assemble_form({FormKind::InterfaceNormalMass}, v, v, PhysicalParams{});
  const int ny = v.n_scalar_nodes();
  const std::array<int, 3> dofs{ny + 0, ny + 1, ny + 3 + 0};  // end, end, mid
  Eigen::Matrix3d expected;
  expected << 4, -1, 2, -1, 4, 2, 2, 2, 16;
  expected /= 30.0;
  const Eigen::MatrixXd D = dense(G);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(D(dofs[i], dofs[j]), expected(i, j), 1e-15);
  }
  EXPECT_NEAR(D.sum(), 1.0, 1e-14);  // total = edge length
}

TEST(Assembly, DivCouplingKillsConstants) {
  const auto m = unit_square(4);
  DofMap v(m, ElementFamily::VecP2c), p(m, ElementFamily::P1c);
  const SpMat B = assemble_form({FormKind::DivCoupling}, v, p, PhysicalParams{});
  const Eigen::VectorXd c = v.interpolate(VectorFunction([](Point2) { return std::array<double, 2>{0.7, -1.3}; }));
  EXPECT_LT((B * c).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Assembly, IncompatibleMeshesRejected) {
  DofMap a(unit_square(2), ElementFamily::P1c), b(unit_square(2), ElementFamily::P1c);
  EXPECT_THROW(assemble_form({FormKind::ScalarMass}, a, b, PhysicalParams{}), AssemblyError);
}

TEST(Assembly, StiffnessFormsSymmetricSemidefinite) {
  const auto m = unit_square(3, DiagonalRule::Alternating);
  DofMap v(m, ElementFamily::VecP2c), rt(m, ElementFamily::RT1);
  PhysicalParams prm;
  prm.K << 2.0, 0.3, 0.3, 1.0;
  prm.beta = 2.0;
  const std::vector<std::pair<SpMat, std::string>> mats = {
      {assemble_form({FormKind::SymGradStiffness}, v, v, prm), "a_f"},
      {assemble_form({FormKind::Elasticity, 1.0, BoundaryTag::Interface, true}, v, v, prm), "a_e"},
      {assemble_form({FormKind::DarcyMass}, rt, rt, prm), "a_d"}};
  for (const auto& [A, name] : mats) {
    EXPECT_TRUE(is_symmetric(A)) << name;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(A));
    EXPECT_GT(es.eigenvalues().minCoeff(), -1e-10 * es.eigenvalues().maxCoeff()) << name;
  }
}

TEST(Assembly, SymGradPositiveDefiniteWithDirichlet) {
  const auto m = unit_square(3);
  DofMap v(m, ElementFamily::VecP2c);
  const SpMat A = assemble_form({FormKind::SymGradStiffness}, v, v, PhysicalParams{});
  EssentialConstraints ec(A, v.boundary_dofs(BoundaryTag::FluidDirichlet));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(ec.matrix()));
  EXPECT_GT(es.eigenvalues().minCoeff(), 1e-8);
}

TEST(Assembly, SymGradEnergyOfIdentityStrain) {
  // u = (x, y): D(u) = I, 2 mu_f |I|^2 * area = 4.
  const auto m = unit_square(2);
  DofMap v(m, ElementFamily::VecP2c);
  const Eigen::VectorXd u = v.interpolate(VectorFunction([](Point2 p) { return std::array<double, 2>{p.x, p.y}; }));
  const SpMat A = assemble_form({FormKind::SymGradStiffness}, v, v, PhysicalParams{});
  EXPECT_NEAR(u.dot(A * u), 4.0, 1e-12);
}

class RTProperty : public ::testing::TestWithParam<std::pair<ElementFamily, ElementFamily>> {};

TEST_P(RTProperty, NormalTraceContinuity) {
  const auto m = unit_square(4, DiagonalRule::Alternating);
  DofMap rt(m, GetParam().first);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-1, 1);
  Eigen::VectorXd x(rt.n_dofs());
  for (auto& c : x) c = U(rng);
  const LineRule line = gauss_line(4);
  for (int e = 0; e < m->n_edges(); ++e) {
    const auto& ed = m->edges[e];
    if (ed.on_boundary()) continue;
    const Point2 n = global_edge_normal(*m, e);
    const int c0 = ed.cells[0], c1 = ed.cells[1];
    for (int q = 0; q < line.size(); ++q) {
      const Point2 pt = m->vertices[ed.v[0]] + line.points[q] * (m->vertices[ed.v[1]] - m->vertices[ed.v[0]]);
      const auto v0 = rt.eval_field(x, c0, rt.geometry(c0).reference_point(pt)).value;
      const auto v1 = rt.eval_field(x, c1, rt.geometry(c1).reference_point(pt)).value;
      EXPECT_NEAR(v0[0] * n.x + v0[1] * n.y, v1[0] * n.x + v1[1] * n.y, 1e-12);
    }
  }
}

TEST_P(RTProperty, DivergenceLiesInPressureSpace) {
  const auto m = unit_square(3, DiagonalRule::Alternating);
  DofMap rt(m, GetParam().first), w(m, GetParam().second);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> U(-1, 1);
  Eigen::VectorXd x(rt.n_dofs());
  for (auto& c : x) c = U(rng);
  // Project div v onto W: M y = -B x (B carries a minus sign).
  const SpMat M = assemble_form({FormKind::ScalarMass}, w, w, PhysicalParams{});
  const SpMat B = assemble_form({FormKind::DivCoupling}, rt, w, PhysicalParams{});
  const Eigen::VectorXd y = Eigen::MatrixXd(M).ldlt().solve(-(B * x));
  const QuadratureRule q = quadrature(4);
  for (int c = 0; c < rt.n_cells(); ++c) {
    for (int p = 0; p < q.size(); ++p) {
      const double d = rt.eval_field(x, c, q.points[p]).div;
      EXPECT_NEAR(d, w.eval_field(y, c, q.points[p]).value[0], 1e-12 * std::max(1.0, std::abs(d)));
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Pairs, RTProperty,
                         ::testing::Values(std::pair{ElementFamily::RT0, ElementFamily::P0},
                                           std::pair{ElementFamily::RT1, ElementFamily::P1dc}));

TEST(DofMap, ContinuityAndCoverage) {
  const auto m = unit_square(3);
  for (auto f : {ElementFamily::P1c, ElementFamily::P2c, ElementFamily::VecP2c, ElementFamily::P0,
                 ElementFamily::P1dc, ElementFamily::RT0, ElementFamily::RT1}) {
    DofMap d(m, f);
    std::vector<int> count(d.n_dofs(), 0);
    for (int c = 0; c < d.n_cells(); ++c) {
      for (int g : d.cell_dofs(c)) ++count[g];
    }
    int shared = 0;
    for (int k : count) {
      EXPECT_GE(k, 1) << to_string(f);
      if (k > 1) ++shared;
    }
    if (f == ElementFamily::P0 || f == ElementFamily::P1dc) EXPECT_EQ(shared, 0) << to_string(f);
    if (f == ElementFamily::P1c || f == ElementFamily::P2c || f == ElementFamily::VecP2c) EXPECT_GT(shared, 0);
  }
}

TEST(Essential, EmptySetLeavesSystemUnchanged) {
  SparseSystem s{SpMat(2, 2), Eigen::Vector2d(1, 2)};
  s.matrix.insert(0, 0) = 2;
  s.matrix.insert(1, 1) = 3;
  const SparseSystem r = apply_essential(s, {}, {});
  EXPECT_EQ(dense(r.matrix), dense(s.matrix));
  EXPECT_EQ(r.rhs, s.rhs);
}

TEST(Essential, AllPinnedToZero) {
  const auto m = unit_square(2);
  DofMap p1(m, ElementFamily::P1c);
  SparseSystem s{assemble_form({FormKind::ScalarMass}, p1, p1, PhysicalParams{}), Eigen::VectorXd::Ones(p1.n_dofs())};
  std::vector<int> all(p1.n_dofs());
  for (int i = 0; i < p1.n_dofs(); ++i) all[i] = i;
  const Eigen::VectorXd x = solve(apply_essential(s, all, std::vector<double>(all.size(), 0.0)));
  EXPECT_EQ(x.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Essential, ConflictingDuplicatesRejected) {
  SparseSystem s{SpMat(2, 2), Eigen::Vector2d(1, 2)};
  s.matrix.insert(0, 0) = 1;
  s.matrix.insert(1, 1) = 1;
  EXPECT_THROW(apply_essential(s, {0, 0}, {1.0, 2.0}), SolverError);
  EXPECT_NO_THROW(apply_essential(s, {0, 0}, {1.0, 1.0}));
}

TEST(Essential, DirichletTraceMatchesNodalData) {
  using std::numbers::pi;
  const auto m = unit_square(8);
  DofMap v(m, ElementFamily::VecP2c);
  const VectorFunction uf = [](Point2 p) {
    return std::array<double, 2>{pi * (-3 * p.x + std::cos(p.y)), pi * (p.y + 1)};
  };
  const SpMat A = assemble_form({FormKind::SymGradStiffness}, v, v, PhysicalParams{}) +
                  assemble_form({FormKind::VectorMass}, v, v, PhysicalParams{});
  const auto dofs = v.boundary_dofs(BoundaryTag::FluidDirichlet);
  const Eigen::VectorXd g = v.interpolate_dofs(uf, dofs);
  EssentialConstraints ec(A, dofs);
  EXPECT_TRUE(is_symmetric(ec.matrix()));
  DirectSolver s;
  s.factorize(ec.matrix());
  const Eigen::VectorXd x = s.solve(ec.lift(Eigen::VectorXd::Zero(v.n_dofs()), g));
  for (std::size_t i = 0; i < dofs.size(); ++i) {
    const Point2 p = v.node_point(dofs[i]);
    EXPECT_EQ(x[dofs[i]], uf(p)[v.dof_component(dofs[i])]);
  }
}

TEST(Solver, IdentityAndTwoByTwo) {
  SpMat I(3, 3);
  I.setIdentity();
  const Eigen::Vector3d b(1, -2, 3);
  EXPECT_LT((solve({I, b}) - b).norm(), 1e-15);
  SpMat A(2, 2);
  A.insert(0, 0) = 2;
  A.insert(0, 1) = 1;
  A.insert(1, 0) = 1;
  A.insert(1, 1) = 2;
  const Eigen::VectorXd x = solve({A, Eigen::Vector2d(3, 3)});
  EXPECT_NEAR(x[0], 1.0, 1e-14);
  EXPECT_NEAR(x[1], 1.0, 1e-14);
}

TEST(Solver, CachedFactorizationIsDeterministic) {
  const auto m = unit_square(6);
  DofMap v(m, ElementFamily::VecP2c);
  const SpMat A = assemble_form({FormKind::SymGradStiffness}, v, v, PhysicalParams{}) +
                  assemble_form({FormKind::VectorMass}, v, v, PhysicalParams{});
  const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(v.n_dofs(), -1, 1);
  DirectSolver cached;
  cached.factorize(A);
  const Eigen::VectorXd x1 = cached.solve(b);
  const Eigen::VectorXd x2 = cached.solve(b);
  DirectSolver fresh;
  fresh.factorize(A);
  const Eigen::VectorXd x3 = fresh.solve(b);
  EXPECT_EQ(x1, x2);
  EXPECT_LE((x1 - x3).cwiseAbs().maxCoeff(), 1e-14 * x1.cwiseAbs().maxCoeff());
  EXPECT_LE((A * x1 - b).norm(), 1e-10 * (1.0 + b.norm()));
}

TEST(Solver, SingularMatrixReported) {
  SpMat Z(2, 2);
  Z.insert(0, 0) = 1.0;
  DirectSolver s("zero block");
  EXPECT_THROW(
      {
        s.factorize(Z);
        s.solve(Eigen::Vector2d(1, 1));
      },
      SolverError);
}
