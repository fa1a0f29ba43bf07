#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fpsi/fem/element.hpp"
#include "fpsi/mesh.hpp"

namespace fpsi {

using ScalarFunction = std::function<double(Point2)>;
using VectorFunction = std::function<std::array<double, 2>(Point2)>;

/// Global numbering of one finite element space on one mesh.
///
/// Numbering:
///   P1c     vertex index
///   P2c     vertices first, then n_vertices + edge
///   VecP2c  component * n_P2 + P2 node
///   P0      cell
///   P1dc    3 * cell + local vertex
///   RT0     edge
///   RT1     2 * edge + {0, 1} for the two edge moments, then
///           2 * n_edges + 2 * cell + {0, 1} for the interior moments
class DofMap {
 public:
  DofMap(std::shared_ptr<const TriMesh> mesh, ElementFamily family);

  ElementFamily family() const { return family_; }
  const FamilyInfo& info() const { return info_; }
  const TriMesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const TriMesh>& mesh_ptr() const { return mesh_; }
  int n_dofs() const { return n_dofs_; }
  int n_local() const { return info_.n_local; }
  int n_cells() const { return mesh_->n_triangles(); }

  std::span<const int> cell_dofs(int cell) const {
    return {cell_dofs_.data() + static_cast<std::size_t>(cell) * info_.n_local,
            static_cast<std::size_t>(info_.n_local)};
  }
  const CellGeometry& geometry(int cell) const { return geometry_[cell]; }
  const RTCellData* rt_data(int cell) const { return info_.hdiv ? &rt_[cell] : nullptr; }

  void eval(int cell, const std::array<double, 2>& xhat, BasisEval& out) const {
    eval_basis(family_, geometry_[cell], rt_data(cell), xhat, out);
  }

  /// DOFs attached to edges carrying `tag`, sorted and unique. For VecP2c a
  /// nonnegative `component` restricts to that Cartesian component.
  std::vector<int> boundary_dofs(BoundaryTag tag, int component = -1) const;
  std::vector<int> boundary_dofs(const std::vector<BoundaryTag>& tags, int component = -1) const;

  /// Node location of a Lagrange DOF (P1c, P2c, VecP2c, P1dc).
  Point2 node_point(int dof) const;
  /// Cartesian component of a VecP2c DOF, 0 for scalar families.
  int dof_component(int dof) const;
  int n_scalar_nodes() const { return n_nodes_; }

  /// Evaluates the DOF functionals of `f` (nodal values, RT moments, cell means).
  Eigen::VectorXd interpolate(const VectorFunction& f) const;
  Eigen::VectorXd interpolate(const ScalarFunction& f) const;
  /// Same as `interpolate` restricted to the listed DOFs.
  Eigen::VectorXd interpolate_dofs(const VectorFunction& f, const std::vector<int>& dofs) const;

  /// Field value (and gradient) of coefficient vector `x` at a reference point.
  struct FieldValue {
    std::array<double, 2> value{};
    std::array<std::array<double, 2>, 2> grad{};
    double div = 0.0;
  };
  FieldValue eval_field(const Eigen::VectorXd& x, int cell, const std::array<double, 2>& xhat) const;

 private:
  double dof_functional(const VectorFunction& f, int dof) const;

  std::shared_ptr<const TriMesh> mesh_;
  ElementFamily family_;
  FamilyInfo info_;
  int n_dofs_ = 0;
  int n_nodes_ = 0;  // scalar node count for Lagrange families
  std::vector<int> cell_dofs_;
  std::vector<CellGeometry> geometry_;
  std::vector<RTCellData> rt_;
  std::vector<int> owner_cell_;  // a cell containing each DOF
};

}  // namespace fpsi
