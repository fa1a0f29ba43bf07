#include "fpsi/fem/assembly.hpp"

#include <algorithm>

namespace fpsi {

int default_form_degree(const DofMap& trial, const DofMap& test) {
  return std::min(8, 2 * std::max(trial.info().degree, test.info().degree) + 2);
}

namespace {

inline double sym_contract(const std::array<std::array<double, 2>, 2>& a,
                           const std::array<std::array<double, 2>, 2>& b) {
  // D(a) : D(b) with D = (grad + grad^T) / 2.
  const double a01 = 0.5 * (a[0][1] + a[1][0]);
  const double b01 = 0.5 * (b[0][1] + b[1][0]);
  return a[0][0] * b[0][0] + a[1][1] * b[1][1] + 2.0 * a01 * b01;
}

void require_components(const DofMap& d, int ncomp, const char* form) {
  if (d.info().n_components != ncomp) {
    throw AssemblyError(std::string(form) + ": space " + to_string(d.family()) + " has the wrong number of components");
  }
}

}  // namespace

SpMat assemble_form(const FormDescriptor& form, const DofMap& trial, const DofMap& test,
                    const PhysicalParams& params, int qdeg) {
  check_same_mesh(trial, test);
  if (qdeg < 0) qdeg = default_form_degree(trial, test);
  const double s = form.scale;
  switch (form.kind) {
    case FormKind::VectorMass:
      require_components(trial, 2, "vector mass");
      require_components(test, 2, "vector mass");
      return assemble_cells(trial, test, qdeg, [s](const BasisEval& u, int i, const BasisEval& v, int j, Point2) {
        return s * (u.value[i][0] * v.value[j][0] + u.value[i][1] * v.value[j][1]);
      });
    case FormKind::ScalarMass:
      require_components(trial, 1, "scalar mass");
      require_components(test, 1, "scalar mass");
      return assemble_cells(trial, test, qdeg, [s](const BasisEval& u, int i, const BasisEval& v, int j, Point2) {
        return s * u.value[i][0] * v.value[j][0];
      });
    case FormKind::SymGradStiffness: {
      const double c = 2.0 * params.mu_f * s;
      return assemble_cells(trial, test, qdeg, [c](const BasisEval& u, int i, const BasisEval& v, int j, Point2) {
        return c * sym_contract(u.grad[i], v.grad[j]);
      });
    }
    case FormKind::DarcyMass: {
      const Eigen::Matrix2d W = params.mu_f * params.K_inv() * s;
      return assemble_cells(trial, test, qdeg, [W](const BasisEval& u, int i, const BasisEval& v, int j, Point2) {
        const double ux = u.value[i][0], uy = u.value[i][1];
        return v.value[j][0] * (W(0, 0) * ux + W(0, 1) * uy) + v.value[j][1] * (W(1, 0) * ux + W(1, 1) * uy);
      });
    }
    case FormKind::Elasticity: {
      const double two_mu = 2.0 * params.mu_p * s;
      const double lam = params.lambda_p * s;
      const double beta = form.include_spring ? params.beta * s : 0.0;
      return assemble_cells(trial, test, qdeg,
                            [=](const BasisEval& u, int i, const BasisEval& v, int j, Point2) {
                              double r = two_mu * sym_contract(u.grad[i], v.grad[j]) + lam * u.div[i] * v.div[j];
                              if (beta != 0.0) {
                                r += beta * (u.value[i][0] * v.value[j][0] + u.value[i][1] * v.value[j][1]);
                              }
                              return r;
                            });
    }
    case FormKind::DivCoupling:
      require_components(trial, 2, "div coupling");
      require_components(test, 1, "div coupling");
      return assemble_cells(trial, test, qdeg, [s](const BasisEval& u, int i, const BasisEval& v, int j, Point2) {
        return -s * u.div[i] * v.value[j][0];
      });
    case FormKind::InterfaceNormalMass:
    case FormKind::InterfaceTangentialMass: {
      require_components(trial, 2, "interface mass");
      require_components(test, 2, "interface mass");
      const auto edges = trial.mesh().edges_with_tag(form.tag);
      const bool normal = form.kind == FormKind::InterfaceNormalMass;
      return assemble_edges(trial, test, edges, qdeg,
                            [s, normal](const BasisEval& u, int i, const BasisEval& v, int j, Point2, Point2 n) {
                              const Point2 d = normal ? n : Point2{-n.y, n.x};
                              const double ud = u.value[i][0] * d.x + u.value[i][1] * d.y;
                              const double vd = v.value[j][0] * d.x + v.value[j][1] * d.y;
                              return s * ud * vd;
                            });
    }
  }
  throw AssemblyError("assemble_form: unknown form");
}

std::vector<std::pair<BoundaryTag, std::vector<int>>> group_edges_by_tag(const TriMesh& m, const std::vector<int>& edges) {
  std::vector<std::pair<BoundaryTag, std::vector<int>>> groups;
  for (int e : edges) {
    const BoundaryTag t = *m.edge_tags[e];
    auto it = std::find_if(groups.begin(), groups.end(), [t](const auto& g) { return g.first == t; });
    if (it == groups.end()) {
      groups.push_back({t, {e}});
    } else {
      it->second.push_back(e);
    }
  }
  return groups;
}

bool is_symmetric(const SpMat& A, double tol) {
  if (A.rows() != A.cols()) return false;
  const SpMat At = A.transpose();
  const SpMat D = A - At;
  double dmax = 0.0, amax = 0.0;
  for (int k = 0; k < D.outerSize(); ++k) {
    for (SpMat::InnerIterator it(D, k); it; ++it) dmax = std::max(dmax, std::abs(it.value()));
  }
  for (int k = 0; k < A.outerSize(); ++k) {
    for (SpMat::InnerIterator it(A, k); it; ++it) amax = std::max(amax, std::abs(it.value()));
  }
  return dmax <= tol * std::max(amax, 1e-300);
}

}  // namespace fpsi
