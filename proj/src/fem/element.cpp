#include "fpsi/fem/element.hpp"

#include <cmath>

#include "fpsi/fem/quadrature.hpp"

namespace fpsi {

const char* to_string(ElementFamily f) {
  switch (f) {
    case ElementFamily::P1c: return "P1c";
    case ElementFamily::P2c: return "P2c";
    case ElementFamily::P0: return "P0";
    case ElementFamily::P1dc: return "P1dc";
    case ElementFamily::RT0: return "RT0";
    case ElementFamily::RT1: return "RT1";
    case ElementFamily::VecP2c: return "VecP2c";
  }
  return "?";
}

FamilyInfo family_info(ElementFamily f) {
  switch (f) {
    case ElementFamily::P1c: return {1, 3, 1, true, false};
    case ElementFamily::P2c: return {2, 6, 1, true, false};
    case ElementFamily::P0: return {0, 1, 1, false, false};
    case ElementFamily::P1dc: return {1, 3, 1, false, false};
    case ElementFamily::RT0: return {1, 3, 2, false, true};
    case ElementFamily::RT1: return {2, 8, 2, false, true};
    case ElementFamily::VecP2c: return {2, 12, 2, true, false};
  }
  throw std::invalid_argument("family_info: unknown family");
}

CellGeometry CellGeometry::from_mesh(const TriMesh& mesh, int cell) {
  CellGeometry g;
  const auto& t = mesh.triangles[cell];
  for (int i = 0; i < 3; ++i) g.v[i] = mesh.vertices[t[i]];
  g.J << g.v[1].x - g.v[0].x, g.v[2].x - g.v[0].x,
         g.v[1].y - g.v[0].y, g.v[2].y - g.v[0].y;
  g.detJ = g.J.determinant();
  const double scale = g.J.cwiseAbs().maxCoeff();
  if (!(g.detJ > 1e-14 * scale * scale)) {
    throw DegenerateCellError("cell " + std::to_string(cell) + " has a degenerate or inverted Jacobian (det = " +
                              std::to_string(g.detJ) + ")");
  }
  g.Jinv = g.J.inverse();
  return g;
}

Point2 CellGeometry::map(double xi, double eta) const {
  return {v[0].x + J(0, 0) * xi + J(0, 1) * eta, v[0].y + J(1, 0) * xi + J(1, 1) * eta};
}

std::array<double, 2> CellGeometry::reference_point(Point2 x) const {
  const Eigen::Vector2d r = Jinv * Eigen::Vector2d(x.x - v[0].x, x.y - v[0].y);
  return {r(0), r(1)};
}

Point2 global_edge_normal(const TriMesh& mesh, int e) {
  const Point2 d = mesh.vertices[mesh.edges[e].v[1]] - mesh.vertices[mesh.edges[e].v[0]];
  const double len = std::hypot(d.x, d.y);
  return {d.y / len, -d.x / len};
}

namespace {

// Scaled monomial frame for RT spaces. RT0 spans P0^2 + x P0; RT1 spans
// P1^2 + x * (homogeneous P1).
int rt_size(ElementFamily f) { return f == ElementFamily::RT0 ? 3 : 8; }

struct MonoEval {
  std::array<std::array<double, 2>, 8> val;
  std::array<std::array<std::array<double, 2>, 2>, 8> grad;  // d/dsx, d/dsy
};

void rt_monomials(ElementFamily f, double sx, double sy, MonoEval& m) {
  if (f == ElementFamily::RT0) {
    m.val[0] = {1, 0};
    m.val[1] = {0, 1};
    m.val[2] = {sx, sy};
    m.grad[0] = {{{0, 0}, {0, 0}}};
    m.grad[1] = {{{0, 0}, {0, 0}}};
    m.grad[2] = {{{1, 0}, {0, 1}}};
    return;
  }
  m.val[0] = {1, 0};
  m.val[1] = {0, 1};
  m.val[2] = {sx, 0};
  m.val[3] = {sy, 0};
  m.val[4] = {0, sx};
  m.val[5] = {0, sy};
  m.val[6] = {sx * sx, sx * sy};
  m.val[7] = {sx * sy, sy * sy};
  m.grad[0] = {{{0, 0}, {0, 0}}};
  m.grad[1] = {{{0, 0}, {0, 0}}};
  m.grad[2] = {{{1, 0}, {0, 0}}};
  m.grad[3] = {{{0, 1}, {0, 0}}};
  m.grad[4] = {{{0, 0}, {1, 0}}};
  m.grad[5] = {{{0, 0}, {0, 1}}};
  m.grad[6] = {{{2 * sx, 0}, {sy, sx}}};
  m.grad[7] = {{{sy, sx}, {0, 2 * sy}}};
}

}  // namespace

RTCellData build_rt_cell(ElementFamily f, const TriMesh& mesh, int cell) {
  if (f != ElementFamily::RT0 && f != ElementFamily::RT1) {
    throw std::invalid_argument("build_rt_cell: not a Raviart-Thomas family");
  }
  const CellGeometry geo = CellGeometry::from_mesh(mesh, cell);
  RTCellData d;
  d.n = rt_size(f);
  d.center = geo.centroid();
  d.scale = std::sqrt(2.0 * geo.area());

  Eigen::Matrix<double, 8, 8> V = Eigen::Matrix<double, 8, 8>::Zero();
  const LineRule line = gauss_line(3);
  MonoEval m;
  for (int k = 0; k < 3; ++k) {
    const int e = mesh.triangle_edges[cell][k];
    const Point2 a = mesh.vertices[mesh.edges[e].v[0]];
    const Point2 b = mesh.vertices[mesh.edges[e].v[1]];
    const Point2 n = global_edge_normal(mesh, e);
    const double len = mesh.edge_length(e);
    for (int q = 0; q < line.size(); ++q) {
      const double t = line.points[q];
      const Point2 x = a + t * (b - a);
      rt_monomials(f, (x.x - d.center.x) / d.scale, (x.y - d.center.y) / d.scale, m);
      const double w = line.weights[q] * len;
      for (int j = 0; j < d.n; ++j) {
        const double flux = m.val[j][0] * n.x + m.val[j][1] * n.y;
        if (f == ElementFamily::RT0) {
          V(k, j) += w * flux;
        } else {
          V(2 * k, j) += w * flux * (1.0 - t);
          V(2 * k + 1, j) += w * flux * t;
        }
      }
    }
  }
  if (f == ElementFamily::RT1) {
    const QuadratureRule qr = quadrature(2);
    for (int q = 0; q < qr.size(); ++q) {
      const Point2 x = geo.map(qr.points[q][0], qr.points[q][1]);
      rt_monomials(f, (x.x - d.center.x) / d.scale, (x.y - d.center.y) / d.scale, m);
      const double w = qr.weights[q] * geo.detJ;
      for (int j = 0; j < 8; ++j) {
        V(6, j) += w * m.val[j][0];
        V(7, j) += w * m.val[j][1];
      }
    }
  }
  const auto lu = V.topLeftCorner(d.n, d.n).fullPivLu();
  if (!lu.isInvertible()) {
    throw DegenerateCellError("build_rt_cell: singular moment matrix on cell " + std::to_string(cell));
  }
  d.coeff.setZero();
  d.coeff.topLeftCorner(d.n, d.n) = lu.inverse();
  return d;
}

void eval_basis(ElementFamily f, const CellGeometry& geo, const RTCellData* rt,
                const std::array<double, 2>& xhat, BasisEval& out) {
  const double xi = xhat[0], eta = xhat[1];
  const std::array<double, 3> lam{1.0 - xi - eta, xi, eta};
  std::array<std::array<double, 2>, 3> glam;
  glam[1] = {geo.Jinv(0, 0), geo.Jinv(0, 1)};
  glam[2] = {geo.Jinv(1, 0), geo.Jinv(1, 1)};
  glam[0] = {-glam[1][0] - glam[2][0], -glam[1][1] - glam[2][1]};

  auto set_scalar = [&out](int i, double v, double gx, double gy) {
    out.value[i] = {v, 0.0};
    out.grad[i] = {{{gx, gy}, {0.0, 0.0}}};
    out.div[i] = 0.0;
  };

  switch (f) {
    case ElementFamily::P0:
      out.n = 1;
      out.ncomp = 1;
      set_scalar(0, 1.0, 0.0, 0.0);
      return;
    case ElementFamily::P1c:
    case ElementFamily::P1dc:
      out.n = 3;
      out.ncomp = 1;
      for (int i = 0; i < 3; ++i) set_scalar(i, lam[i], glam[i][0], glam[i][1]);
      return;
    case ElementFamily::P2c:
    case ElementFamily::VecP2c: {
      std::array<double, 6> v;
      std::array<std::array<double, 2>, 6> g;
      for (int i = 0; i < 3; ++i) {
        v[i] = lam[i] * (2.0 * lam[i] - 1.0);
        g[i] = {(4.0 * lam[i] - 1.0) * glam[i][0], (4.0 * lam[i] - 1.0) * glam[i][1]};
      }
      for (int k = 0; k < 3; ++k) {
        const int a = k, b = (k + 1) % 3;
        v[3 + k] = 4.0 * lam[a] * lam[b];
        g[3 + k] = {4.0 * (lam[a] * glam[b][0] + lam[b] * glam[a][0]),
                    4.0 * (lam[a] * glam[b][1] + lam[b] * glam[a][1])};
      }
      if (f == ElementFamily::P2c) {
        out.n = 6;
        out.ncomp = 1;
        for (int i = 0; i < 6; ++i) set_scalar(i, v[i], g[i][0], g[i][1]);
        return;
      }
      out.n = 12;
      out.ncomp = 2;
      for (int i = 0; i < 6; ++i) {
        out.value[i] = {v[i], 0.0};
        out.grad[i] = {{{g[i][0], g[i][1]}, {0.0, 0.0}}};
        out.div[i] = g[i][0];
        out.value[6 + i] = {0.0, v[i]};
        out.grad[6 + i] = {{{0.0, 0.0}, {g[i][0], g[i][1]}}};
        out.div[6 + i] = g[i][1];
      }
      return;
    }
    case ElementFamily::RT0:
    case ElementFamily::RT1: {
      if (rt == nullptr) throw std::invalid_argument("eval_basis: RT family needs cell data");
      const Point2 x = geo.map(xi, eta);
      const double s = rt->scale;
      MonoEval m;
      rt_monomials(f, (x.x - rt->center.x) / s, (x.y - rt->center.y) / s, m);
      out.n = rt->n;
      out.ncomp = 2;
      for (int k = 0; k < rt->n; ++k) {
        std::array<double, 2> val{0.0, 0.0};
        std::array<std::array<double, 2>, 2> gr{{{0, 0}, {0, 0}}};
        for (int j = 0; j < rt->n; ++j) {
          const double c = rt->coeff(j, k);
          if (c == 0.0) continue;
          for (int comp = 0; comp < 2; ++comp) {
            val[comp] += c * m.val[j][comp];
            gr[comp][0] += c * m.grad[j][comp][0] / s;
            gr[comp][1] += c * m.grad[j][comp][1] / s;
          }
        }
        out.value[k] = val;
        out.grad[k] = gr;
        out.div[k] = gr[0][0] + gr[1][1];
      }
      return;
    }
  }
}

BasisEval eval_basis(ElementFamily f, const TriMesh& mesh, int cell, const std::array<double, 2>& xhat) {
  const CellGeometry geo = CellGeometry::from_mesh(mesh, cell);
  BasisEval out;
  if (family_info(f).hdiv) {
    const RTCellData rt = build_rt_cell(f, mesh, cell);
    eval_basis(f, geo, &rt, xhat, out);
  } else {
    eval_basis(f, geo, nullptr, xhat, out);
  }
  return out;
}

}  // namespace fpsi
