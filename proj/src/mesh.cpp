#include "fpsi/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

namespace fpsi {

const char* to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::FluidDirichlet: return "FluidDirichlet";
    case BoundaryTag::FluidNeumann: return "FluidNeumann";
    case BoundaryTag::Interface: return "Interface";
    case BoundaryTag::PoroDispDirichlet: return "PoroDispDirichlet";
    case BoundaryTag::PoroTraction: return "PoroTraction";
    case BoundaryTag::DarcyPressure: return "DarcyPressure";
    case BoundaryTag::DarcyFlux: return "DarcyFlux";
    case BoundaryTag::FluidInflow: return "FluidInflow";
    case BoundaryTag::FluidOutflow: return "FluidOutflow";
    case BoundaryTag::PoroExternal: return "PoroExternal";
    case BoundaryTag::FluidSymmetry: return "FluidSymmetry";
  }
  return "?";
}

double TriMesh::signed_area(int cell) const {
  const auto& t = triangles[cell];
  return 0.5 * cross(vertices[t[1]] - vertices[t[0]], vertices[t[2]] - vertices[t[0]]);
}

Point2 TriMesh::edge_midpoint(int e) const {
  return 0.5 * (vertices[edges[e].v[0]] + vertices[edges[e].v[1]]);
}

double TriMesh::edge_length(int e) const {
  const Point2 d = vertices[edges[e].v[1]] - vertices[edges[e].v[0]];
  return std::hypot(d.x, d.y);
}

Point2 TriMesh::outward_normal(int cell, int e) const {
  const auto& t = triangles[cell];
  const auto& te = triangle_edges[cell];
  for (int k = 0; k < 3; ++k) {
    if (te[k] != e) continue;
    // Counterclockwise triangle: the outward normal of edge (k, k+1) is the
    // edge direction rotated by -90 degrees.
    const Point2 d = vertices[t[(k + 1) % 3]] - vertices[t[k]];
    const double len = std::hypot(d.x, d.y);
    return {d.y / len, -d.x / len};
  }
  throw MeshError("outward_normal: edge " + std::to_string(e) + " is not on cell " +
                  std::to_string(cell));
}

std::vector<int> TriMesh::edges_with_tag(BoundaryTag tag) const {
  std::vector<int> out;
  for (int e = 0; e < n_edges(); ++e) {
    if (edge_tags[e] && *edge_tags[e] == tag) out.push_back(e);
  }
  return out;
}

namespace {

void build_edges(TriMesh& m) {
  std::map<std::pair<int, int>, int> index;
  m.edges.clear();
  m.triangle_edges.assign(m.triangles.size(), {-1, -1, -1});
  for (int c = 0; c < m.n_triangles(); ++c) {
    const auto& t = m.triangles[c];
    for (int k = 0; k < 3; ++k) {
      int a = t[k];
      int b = t[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      auto [it, inserted] = index.try_emplace({a, b}, m.n_edges());
      if (inserted) {
        Edge e;
        e.v = {a, b};
        e.cells = {c, -1};
        m.edges.push_back(e);
      } else {
        m.edges[it->second].cells[1] = c;
      }
      m.triangle_edges[c][k] = it->second;
    }
  }
  m.edge_tags.assign(m.edges.size(), std::nullopt);
}

}  // namespace

TriMesh build_rect_mesh(double x0, double x1, double y0, double y1, int nx, int ny,
                        DiagonalRule diagonal, DomainLabel domain) {
  if (nx < 1 || ny < 1) {
    throw std::invalid_argument("build_rect_mesh: subdivision counts must be >= 1 (got " +
                                std::to_string(nx) + "x" + std::to_string(ny) + ")");
  }
  if (!(x1 > x0) || !(y1 > y0)) {
    throw std::invalid_argument("build_rect_mesh: empty rectangle");
  }
  TriMesh m;
  m.domain = domain;
  m.vertices.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (int j = 0; j <= ny; ++j) {
    // Pin the last coordinate exactly so matched interfaces compare bitwise.
    const double y = (j == ny) ? y1 : y0 + (y1 - y0) * j / ny;
    for (int i = 0; i <= nx; ++i) {
      const double x = (i == nx) ? x1 : x0 + (x1 - x0) * i / nx;
      m.vertices.push_back({x, y});
    }
  }
  auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
  m.triangles.reserve(static_cast<std::size_t>(2 * nx * ny));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      bool lower_left = true;
      switch (diagonal) {
        case DiagonalRule::LowerLeft: lower_left = true; break;
        case DiagonalRule::LowerRight: lower_left = false; break;
        case DiagonalRule::Alternating: lower_left = ((i + j) % 2 == 0); break;
      }
      if (lower_left) {
        m.triangles.push_back({v00, v10, v11});
        m.triangles.push_back({v00, v11, v01});
      } else {
        m.triangles.push_back({v00, v10, v01});
        m.triangles.push_back({v10, v11, v01});
      }
    }
  }
  build_edges(m);
  return m;
}

TriMesh tag_boundaries(TriMesh mesh, const std::vector<TagRule>& rules) {
  std::ostringstream untagged;
  int n_untagged = 0;
  for (int e = 0; e < mesh.n_edges(); ++e) {
    mesh.edge_tags[e].reset();
    if (!mesh.edges[e].on_boundary()) continue;
    const Point2 a = mesh.vertices[mesh.edges[e].v[0]];
    const Point2 b = mesh.vertices[mesh.edges[e].v[1]];
    int matches = 0;
    for (const auto& [pred, tag] : rules) {
      if (pred(a, b)) {
        if (matches > 0 && *mesh.edge_tags[e] != tag) {
          throw MeshError("tag_boundaries: edge " + std::to_string(e) + " matches both " +
                          to_string(*mesh.edge_tags[e]) + " and " + to_string(tag));
        }
        mesh.edge_tags[e] = tag;
        ++matches;
      }
    }
    if (matches == 0) {
      if (n_untagged < 8) {
        untagged << " #" << e << " (" << a.x << "," << a.y << ")-(" << b.x << "," << b.y << ")";
      }
      ++n_untagged;
    }
  }
  if (n_untagged > 0) {
    throw MeshError("tag_boundaries: " + std::to_string(n_untagged) +
                    " boundary edge(s) match no rule:" + untagged.str());
  }
  return mesh;
}

namespace predicates {
EdgePredicate on_line_x(double x, double tol) {
  return [x, tol](Point2 a, Point2 b) { return std::abs(a.x - x) <= tol && std::abs(b.x - x) <= tol; };
}
EdgePredicate on_line_y(double y, double tol) {
  return [y, tol](Point2 a, Point2 b) { return std::abs(a.y - y) <= tol && std::abs(b.y - y) <= tol; };
}
}  // namespace predicates

double InterfaceSegment::length() const { return std::hypot(b.x - a.x, b.y - a.y); }

double InterfaceMesh::total_length() const {
  double s = 0.0;
  for (const auto& seg : segments) s += seg.length();
  return s;
}

InterfaceMesh extract_interface(const TriMesh& fluid, const TriMesh& poro) {
  constexpr double kTol = 1e-12;
  const auto fe = fluid.edges_with_tag(BoundaryTag::Interface);
  const auto pe = poro.edges_with_tag(BoundaryTag::Interface);
  if (fe.empty()) throw MeshError("extract_interface: fluid mesh has no Interface edges");
  if (fe.size() != pe.size()) {
    throw MeshError("extract_interface: non-matching meshes (" + std::to_string(fe.size()) +
                    " fluid vs " + std::to_string(pe.size()) + " poroelastic interface edges)");
  }

  InterfaceMesh im;
  const int c0 = fluid.edges[fe[0]].cells[0];
  im.normal_f = fluid.outward_normal(c0, fe[0]);
  im.normal_p = {-im.normal_f.x, -im.normal_f.y};
  im.tangent_f = {-im.normal_f.y, im.normal_f.x};
  if (im.tangent_f.x < 0.0 || (im.tangent_f.x == 0.0 && im.tangent_f.y < 0.0)) {
    im.tangent_f = {-im.tangent_f.x, -im.tangent_f.y};
  }
  im.origin = fluid.vertices[fluid.edges[fe[0]].v[0]];
  for (int e : fe) {
    im.origin = (dot(fluid.vertices[fluid.edges[e].v[0]], im.tangent_f) < dot(im.origin, im.tangent_f))
                    ? fluid.vertices[fluid.edges[e].v[0]]
                    : im.origin;
    im.origin = (dot(fluid.vertices[fluid.edges[e].v[1]], im.tangent_f) < dot(im.origin, im.tangent_f))
                    ? fluid.vertices[fluid.edges[e].v[1]]
                    : im.origin;
  }

  auto close = [](Point2 p, Point2 q) { return std::abs(p.x - q.x) <= kTol && std::abs(p.y - q.y) <= kTol; };

  std::vector<bool> used(pe.size(), false);
  for (int e : fe) {
    InterfaceSegment s;
    s.fluid_edge = e;
    s.fluid_cell = fluid.edges[e].cells[0];
    Point2 a = fluid.vertices[fluid.edges[e].v[0]];
    Point2 b = fluid.vertices[fluid.edges[e].v[1]];
    if (im.arc_coordinate(b) < im.arc_coordinate(a)) std::swap(a, b);
    s.a = a;
    s.b = b;
    const Point2 n = fluid.outward_normal(s.fluid_cell, e);
    if (std::abs(dot(n, im.normal_f) - 1.0) > 1e-12) {
      throw MeshError("extract_interface: interface is not flat (edge " + std::to_string(e) + ")");
    }
    for (std::size_t k = 0; k < pe.size(); ++k) {
      if (used[k]) continue;
      const Point2 pa = poro.vertices[poro.edges[pe[k]].v[0]];
      const Point2 pb = poro.vertices[poro.edges[pe[k]].v[1]];
      if ((close(pa, a) && close(pb, b)) || (close(pa, b) && close(pb, a))) {
        used[k] = true;
        s.poro_edge = pe[k];
        s.poro_cell = poro.edges[pe[k]].cells[0];
        break;
      }
    }
    if (s.poro_edge < 0) {
      throw MeshError("extract_interface: non-matching meshes, fluid edge " + std::to_string(e) +
                      " has no poroelastic partner within 1e-12");
    }
    const Point2 np = poro.outward_normal(s.poro_cell, s.poro_edge);
    if (std::abs(dot(np, im.normal_f) + 1.0) > 1e-12) {
      throw MeshError("extract_interface: poroelastic normal is not opposite the fluid normal");
    }
    im.segments.push_back(s);
  }
  std::sort(im.segments.begin(), im.segments.end(), [&](const auto& l, const auto& r) {
    return im.arc_coordinate(l.a) < im.arc_coordinate(r.a);
  });
  return im;
}

void write_vtk_mesh(std::ostream& out, const TriMesh& mesh, const std::string& title) {
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out.precision(17);
  out << "POINTS " << mesh.n_vertices() << " double\n";
  for (const auto& p : mesh.vertices) out << p.x << ' ' << p.y << " 0\n";
  out << "CELLS " << mesh.n_triangles() << ' ' << 4 * mesh.n_triangles() << '\n';
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << mesh.n_triangles() << '\n';
  for (int c = 0; c < mesh.n_triangles(); ++c) out << "5\n";
}

}  // namespace fpsi
