#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Sparse>

#include "fpsi/fem/dofmap.hpp"
#include "fpsi/fem/quadrature.hpp"
#include "fpsi/params.hpp"

namespace fpsi {

using SpMat = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reference coordinates of the point at parameter t on local edge k.
inline std::array<double, 2> edge_reference_point(int k, double t) {
  static constexpr double ref[3][2] = {{0, 0}, {1, 0}, {0, 1}};
  const int a = k, b = (k + 1) % 3;
  return {ref[a][0] + t * (ref[b][0] - ref[a][0]), ref[a][1] + t * (ref[b][1] - ref[a][1])};
}

inline int local_edge_index(const TriMesh& m, int cell, int e) {
  for (int k = 0; k < 3; ++k) {
    if (m.triangle_edges[cell][k] == e) return k;
  }
  throw AssemblyError("edge " + std::to_string(e) + " is not on cell " + std::to_string(cell));
}

inline void check_same_mesh(const DofMap& a, const DofMap& b) {
  if (&a.mesh() != &b.mesh()) throw AssemblyError("trial and test spaces live on different meshes");
}

/// Cell integral sum_K int_K kernel(u, i, v, j, x) dx. Rows are test DOFs,
/// columns trial DOFs. `kernel` returns the integrand for one (i, j) pair.
template <class Kernel>
SpMat assemble_cells(const DofMap& trial, const DofMap& test, int qdeg, Kernel&& kernel) {
  check_same_mesh(trial, test);
  const QuadratureRule q = quadrature(qdeg);
  Triplets trip;
  trip.reserve(static_cast<std::size_t>(trial.n_cells()) * trial.n_local() * test.n_local());
  BasisEval bu, bv;
  Eigen::MatrixXd local(test.n_local(), trial.n_local());
  for (int c = 0; c < trial.n_cells(); ++c) {
    local.setZero();
    const CellGeometry& g = trial.geometry(c);
    for (int p = 0; p < q.size(); ++p) {
      trial.eval(c, q.points[p], bu);
      test.eval(c, q.points[p], bv);
      const Point2 x = g.map(q.points[p][0], q.points[p][1]);
      const double w = q.weights[p] * g.detJ;
      for (int j = 0; j < bv.n; ++j) {
        for (int i = 0; i < bu.n; ++i) local(j, i) += w * kernel(bu, i, bv, j, x);
      }
    }
    const auto du = trial.cell_dofs(c);
    const auto dv = test.cell_dofs(c);
    for (int j = 0; j < bv.n; ++j) {
      for (int i = 0; i < bu.n; ++i) {
        if (local(j, i) != 0.0) trip.emplace_back(dv[j], du[i], local(j, i));
      }
    }
  }
  SpMat A(test.n_dofs(), trial.n_dofs());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

/// Edge integral over the listed boundary edges, evaluated from the edge's
/// (first) adjacent cell. kernel(u, i, v, j, x, n) with outward normal n.
template <class Kernel>
SpMat assemble_edges(const DofMap& trial, const DofMap& test, const std::vector<int>& edges, int qdeg,
                     Kernel&& kernel) {
  check_same_mesh(trial, test);
  const TriMesh& m = trial.mesh();
  const LineRule line = line_rule_for_degree(qdeg);
  Triplets trip;
  BasisEval bu, bv;
  Eigen::MatrixXd local(test.n_local(), trial.n_local());
  for (int e : edges) {
    const int c = m.edges[e].cells[0];
    const int k = local_edge_index(m, c, e);
    const Point2 n = m.outward_normal(c, e);
    const double len = m.edge_length(e);
    const CellGeometry& g = trial.geometry(c);
    local.setZero();
    for (int p = 0; p < line.size(); ++p) {
      const auto xhat = edge_reference_point(k, line.points[p]);
      trial.eval(c, xhat, bu);
      test.eval(c, xhat, bv);
      const Point2 x = g.map(xhat[0], xhat[1]);
      const double w = line.weights[p] * len;
      for (int j = 0; j < bv.n; ++j) {
        for (int i = 0; i < bu.n; ++i) local(j, i) += w * kernel(bu, i, bv, j, x, n);
      }
    }
    const auto du = trial.cell_dofs(c);
    const auto dv = test.cell_dofs(c);
    for (int j = 0; j < bv.n; ++j) {
      for (int i = 0; i < bu.n; ++i) {
        if (local(j, i) != 0.0) trip.emplace_back(dv[j], du[i], local(j, i));
      }
    }
  }
  SpMat A(test.n_dofs(), trial.n_dofs());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

/// Load vector sum_K int_K integrand(v, j, x) dx.
template <class Integrand>
Eigen::VectorXd assemble_cell_load(const DofMap& test, int qdeg, Integrand&& integrand) {
  const QuadratureRule q = quadrature(qdeg);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(test.n_dofs());
  BasisEval bv;
  for (int c = 0; c < test.n_cells(); ++c) {
    const CellGeometry& g = test.geometry(c);
    const auto dv = test.cell_dofs(c);
    for (int p = 0; p < q.size(); ++p) {
      test.eval(c, q.points[p], bv);
      const Point2 x = g.map(q.points[p][0], q.points[p][1]);
      const double w = q.weights[p] * g.detJ;
      for (int j = 0; j < bv.n; ++j) b[dv[j]] += w * integrand(bv, j, x);
    }
  }
  return b;
}

/// Load vector over boundary edges: integrand(v, j, x, n).
template <class Integrand>
Eigen::VectorXd assemble_edge_load(const DofMap& test, const std::vector<int>& edges, int qdeg,
                                   Integrand&& integrand) {
  const TriMesh& m = test.mesh();
  const LineRule line = line_rule_for_degree(qdeg);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(test.n_dofs());
  BasisEval bv;
  for (int e : edges) {
    const int c = m.edges[e].cells[0];
    const int k = local_edge_index(m, c, e);
    const Point2 n = m.outward_normal(c, e);
    const double len = m.edge_length(e);
    const CellGeometry& g = test.geometry(c);
    const auto dv = test.cell_dofs(c);
    for (int p = 0; p < line.size(); ++p) {
      const auto xhat = edge_reference_point(k, line.points[p]);
      test.eval(c, xhat, bv);
      const Point2 x = g.map(xhat[0], xhat[1]);
      const double w = line.weights[p] * len;
      for (int j = 0; j < bv.n; ++j) b[dv[j]] += w * integrand(bv, j, x, n);
    }
  }
  return b;
}

enum class FormKind {
  VectorMass,        // (u, v)
  ScalarMass,        // (p, q)
  SymGradStiffness,  // (2 mu_f D(u), D(v))
  DarcyMass,         // (mu_f K^-1 u, v)
  Elasticity,        // 2 mu_p (D(u), D(v)) + lambda_p (div u, div v) [+ beta (u, v)]
  DivCoupling,       // -(div u, q); trial is the vector space
  InterfaceNormalMass,      // <u.n, v.n> on tagged edges
  InterfaceTangentialMass,  // <u.t, v.t> on tagged edges
};

struct FormDescriptor {
  FormKind kind;
  double scale = 1.0;
  BoundaryTag tag = BoundaryTag::Interface;  // boundary forms only
  bool include_spring = false;               // Elasticity: add beta * mass
};

/// Default quadrature degree for a bilinear form: 2 * max degree + 2, capped at 8.
int default_form_degree(const DofMap& trial, const DofMap& test);

SpMat assemble_form(const FormDescriptor& form, const DofMap& trial, const DofMap& test,
                    const PhysicalParams& params, int qdeg = -1);

/// Appends scale * A at offset (r0, c0) of a larger block matrix.
inline void add_block(Triplets& trip, const SpMat& A, Eigen::Index r0, Eigen::Index c0, double scale = 1.0) {
  for (int k = 0; k < A.outerSize(); ++k) {
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      trip.emplace_back(static_cast<int>(r0 + it.row()), static_cast<int>(c0 + it.col()), scale * it.value());
    }
  }
}

/// Splits tagged edges into groups sharing one tag, in order of first appearance.
std::vector<std::pair<BoundaryTag, std::vector<int>>> group_edges_by_tag(const TriMesh& m, const std::vector<int>& edges);

/// Symmetric part check ||A - A^T||_max <= tol * ||A||_max.
bool is_symmetric(const SpMat& A, double tol = 1e-12);

}  // namespace fpsi
