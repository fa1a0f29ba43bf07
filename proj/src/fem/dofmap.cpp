#include "fpsi/fem/dofmap.hpp"

#include <algorithm>
#include <stdexcept>

#include "fpsi/fem/quadrature.hpp"

namespace fpsi {

DofMap::DofMap(std::shared_ptr<const TriMesh> mesh, ElementFamily family)
    : mesh_(std::move(mesh)), family_(family), info_(family_info(family)) {
  if (!mesh_) throw std::invalid_argument("DofMap: null mesh");
  const TriMesh& m = *mesh_;
  const int nc = m.n_triangles();
  const int nv = m.n_vertices();
  const int ne = m.n_edges();
  const int nl = info_.n_local;

  geometry_.reserve(nc);
  for (int c = 0; c < nc; ++c) geometry_.push_back(CellGeometry::from_mesh(m, c));
  if (info_.hdiv) {
    rt_.reserve(nc);
    for (int c = 0; c < nc; ++c) rt_.push_back(build_rt_cell(family_, m, c));
  }

  cell_dofs_.assign(static_cast<std::size_t>(nc) * nl, -1);
  switch (family_) {
    case ElementFamily::P1c: n_nodes_ = n_dofs_ = nv; break;
    case ElementFamily::P2c: n_nodes_ = n_dofs_ = nv + ne; break;
    case ElementFamily::VecP2c: n_nodes_ = nv + ne; n_dofs_ = 2 * n_nodes_; break;
    case ElementFamily::P0: n_dofs_ = nc; break;
    case ElementFamily::P1dc: n_nodes_ = n_dofs_ = 3 * nc; break;
    case ElementFamily::RT0: n_dofs_ = ne; break;
    case ElementFamily::RT1: n_dofs_ = 2 * ne + 2 * nc; break;
  }
  for (int c = 0; c < nc; ++c) {
    int* d = cell_dofs_.data() + static_cast<std::size_t>(c) * nl;
    const auto& t = m.triangles[c];
    const auto& te = m.triangle_edges[c];
    switch (family_) {
      case ElementFamily::P1c:
        for (int i = 0; i < 3; ++i) d[i] = t[i];
        break;
      case ElementFamily::P2c:
      case ElementFamily::VecP2c:
        for (int i = 0; i < 3; ++i) d[i] = t[i];
        for (int k = 0; k < 3; ++k) d[3 + k] = nv + te[k];
        if (family_ == ElementFamily::VecP2c) {
          for (int i = 0; i < 6; ++i) d[6 + i] = n_nodes_ + d[i];
        }
        break;
      case ElementFamily::P0: d[0] = c; break;
      case ElementFamily::P1dc:
        for (int i = 0; i < 3; ++i) d[i] = 3 * c + i;
        break;
      case ElementFamily::RT0:
        for (int k = 0; k < 3; ++k) d[k] = te[k];
        break;
      case ElementFamily::RT1:
        for (int k = 0; k < 3; ++k) {
          d[2 * k] = 2 * te[k];
          d[2 * k + 1] = 2 * te[k] + 1;
        }
        d[6] = 2 * ne + 2 * c;
        d[7] = 2 * ne + 2 * c + 1;
        break;
    }
  }
  owner_cell_.assign(n_dofs_, -1);
  for (int c = 0; c < nc; ++c) {
    for (int dof : cell_dofs(c)) {
      if (owner_cell_[dof] < 0) owner_cell_[dof] = c;
    }
  }
}

std::vector<int> DofMap::boundary_dofs(BoundaryTag tag, int component) const {
  return boundary_dofs(std::vector<BoundaryTag>{tag}, component);
}

std::vector<int> DofMap::boundary_dofs(const std::vector<BoundaryTag>& tags, int component) const {
  const TriMesh& m = *mesh_;
  const int nv = m.n_vertices();
  std::vector<int> out;
  for (int e = 0; e < m.n_edges(); ++e) {
    if (!m.edge_tags[e]) continue;
    if (std::find(tags.begin(), tags.end(), *m.edge_tags[e]) == tags.end()) continue;
    const auto& ed = m.edges[e];
    switch (family_) {
      case ElementFamily::P1c:
        out.push_back(ed.v[0]);
        out.push_back(ed.v[1]);
        break;
      case ElementFamily::P2c:
        out.push_back(ed.v[0]);
        out.push_back(ed.v[1]);
        out.push_back(nv + e);
        break;
      case ElementFamily::VecP2c:
        for (int c = 0; c < 2; ++c) {
          if (component >= 0 && component != c) continue;
          out.push_back(c * n_nodes_ + ed.v[0]);
          out.push_back(c * n_nodes_ + ed.v[1]);
          out.push_back(c * n_nodes_ + nv + e);
        }
        break;
      case ElementFamily::RT0: out.push_back(e); break;
      case ElementFamily::RT1:
        out.push_back(2 * e);
        out.push_back(2 * e + 1);
        break;
      case ElementFamily::P0:
      case ElementFamily::P1dc: break;
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Point2 DofMap::node_point(int dof) const {
  const TriMesh& m = *mesh_;
  switch (family_) {
    case ElementFamily::P1c: return m.vertices[dof];
    case ElementFamily::P2c:
    case ElementFamily::VecP2c: {
      const int node = dof % n_nodes_;
      return node < m.n_vertices() ? m.vertices[node] : m.edge_midpoint(node - m.n_vertices());
    }
    case ElementFamily::P1dc: return m.vertices[m.triangles[dof / 3][dof % 3]];
    default: throw std::invalid_argument(std::string("node_point: no nodes for family ") + to_string(family_));
  }
}

int DofMap::dof_component(int dof) const {
  return family_ == ElementFamily::VecP2c ? dof / n_nodes_ : 0;
}

double DofMap::dof_functional(const VectorFunction& f, int dof) const {
  const TriMesh& m = *mesh_;
  switch (family_) {
    case ElementFamily::P1c:
    case ElementFamily::P2c:
    case ElementFamily::P1dc: return f(node_point(dof))[0];
    case ElementFamily::VecP2c: return f(node_point(dof))[dof_component(dof)];
    case ElementFamily::P0: {
      const QuadratureRule q = quadrature(6);
      const CellGeometry& g = geometry_[dof];
      double s = 0.0;
      for (int i = 0; i < q.size(); ++i) s += q.weights[i] * f(g.map(q.points[i][0], q.points[i][1]))[0];
      return s / 0.5;
    }
    case ElementFamily::RT0:
    case ElementFamily::RT1: {
      const int ne = m.n_edges();
      if (family_ == ElementFamily::RT1 && dof >= 2 * ne) {
        const int c = (dof - 2 * ne) / 2;
        const int comp = (dof - 2 * ne) % 2;
        const QuadratureRule q = quadrature(6);
        const CellGeometry& g = geometry_[c];
        double s = 0.0;
        for (int i = 0; i < q.size(); ++i) {
          s += q.weights[i] * g.detJ * f(g.map(q.points[i][0], q.points[i][1]))[comp];
        }
        return s;
      }
      const int e = family_ == ElementFamily::RT0 ? dof : dof / 2;
      const int which = family_ == ElementFamily::RT0 ? -1 : dof % 2;
      const Point2 a = m.vertices[m.edges[e].v[0]];
      const Point2 b = m.vertices[m.edges[e].v[1]];
      const Point2 n = global_edge_normal(m, e);
      const double len = m.edge_length(e);
      const LineRule line = gauss_line(6);
      double s = 0.0;
      for (int i = 0; i < line.size(); ++i) {
        const double t = line.points[i];
        const auto v = f(a + t * (b - a));
        double w = line.weights[i] * len * (v[0] * n.x + v[1] * n.y);
        if (which == 0) w *= 1.0 - t;
        if (which == 1) w *= t;
        s += w;
      }
      return s;
    }
  }
  return 0.0;
}

Eigen::VectorXd DofMap::interpolate(const VectorFunction& f) const {
  Eigen::VectorXd x(n_dofs_);
  for (int d = 0; d < n_dofs_; ++d) x[d] = dof_functional(f, d);
  return x;
}

Eigen::VectorXd DofMap::interpolate(const ScalarFunction& f) const {
  return interpolate(VectorFunction([&f](Point2 p) { return std::array<double, 2>{f(p), 0.0}; }));
}

Eigen::VectorXd DofMap::interpolate_dofs(const VectorFunction& f, const std::vector<int>& dofs) const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(dofs.size()));
  for (std::size_t i = 0; i < dofs.size(); ++i) x[static_cast<Eigen::Index>(i)] = dof_functional(f, dofs[i]);
  return x;
}

DofMap::FieldValue DofMap::eval_field(const Eigen::VectorXd& x, int cell, const std::array<double, 2>& xhat) const {
  BasisEval b;
  eval(cell, xhat, b);
  FieldValue fv;
  const auto dofs = cell_dofs(cell);
  for (int i = 0; i < b.n; ++i) {
    const double c = x[dofs[i]];
    for (int comp = 0; comp < 2; ++comp) {
      fv.value[comp] += c * b.value[i][comp];
      fv.grad[comp][0] += c * b.grad[i][comp][0];
      fv.grad[comp][1] += c * b.grad[i][comp][1];
    }
    fv.div += c * b.div[i];
  }
  return fv;
}

}  // namespace fpsi
