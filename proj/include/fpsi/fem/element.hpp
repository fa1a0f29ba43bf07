#pragma once

#include <array>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "fpsi/mesh.hpp"

namespace fpsi {

enum class ElementFamily { P1c, P2c, P0, P1dc, RT0, RT1, VecP2c };

const char* to_string(ElementFamily f);

struct FamilyInfo {
  int degree;        // polynomial degree of the local space (complete degree)
  int n_local;       // local DOFs per cell
  int n_components;  // 1 for scalar, 2 for vector families
  bool continuous;   // DOFs shared across cells
  bool hdiv;         // Raviart-Thomas
};

FamilyInfo family_info(ElementFamily f);

inline constexpr int kMaxLocalDofs = 12;

/// Affine map of one triangle: x = v0 + J * xhat.
struct CellGeometry {
  std::array<Point2, 3> v;
  Eigen::Matrix2d J;
  Eigen::Matrix2d Jinv;
  double detJ = 0.0;

  static CellGeometry from_mesh(const TriMesh& mesh, int cell);
  Point2 map(double xi, double eta) const;
  std::array<double, 2> reference_point(Point2 x) const;
  Point2 centroid() const { return (1.0 / 3.0) * (v[0] + v[1] + v[2]); }
  double area() const { return 0.5 * detJ; }
};

/// Local RT basis coefficients in the cell's scaled monomial frame.
/// Row i of `coeff` is not used directly; basis k = sum_j coeff(j, k) m_j.
struct RTCellData {
  Eigen::Matrix<double, 8, 8> coeff;
  Point2 center;
  double scale = 1.0;
  int n = 0;
};

/// Physical-space basis values at one point. For scalar families only
/// component 0 is meaningful.
struct BasisEval {
  int n = 0;
  int ncomp = 1;
  std::array<std::array<double, 2>, kMaxLocalDofs> value{};
  // grad[i][c][d] = d(value_c)/dx_d
  std::array<std::array<std::array<double, 2>, 2>, kMaxLocalDofs> grad{};
  std::array<double, kMaxLocalDofs> div{};
};

class DegenerateCellError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Builds RT local data for `cell`. Edge DOFs are flux functionals relative
/// to the global edge normal (edge tangent v0->v1 rotated by -90 degrees),
/// which makes normal components single valued across shared edges.
RTCellData build_rt_cell(ElementFamily f, const TriMesh& mesh, int cell);

/// Fills `out` with the basis of `f` on `geo` at reference point `xhat`.
/// `rt` is required for RT families.
void eval_basis(ElementFamily f, const CellGeometry& geo, const RTCellData* rt,
                const std::array<double, 2>& xhat, BasisEval& out);

/// Convenience overload that builds the geometry (and RT data) itself.
BasisEval eval_basis(ElementFamily f, const TriMesh& mesh, int cell,
                     const std::array<double, 2>& xhat);

/// Global unit normal of edge e (tangent rotated by -90 degrees).
Point2 global_edge_normal(const TriMesh& mesh, int e);

}  // namespace fpsi
