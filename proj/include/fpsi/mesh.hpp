#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fpsi {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }

/// Raised when mesh input or tagging rules are inconsistent.
class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class BoundaryTag {
  FluidDirichlet,
  FluidNeumann,
  Interface,
  PoroDispDirichlet,
  PoroTraction,
  DarcyPressure,
  DarcyFlux,
  FluidInflow,
  FluidOutflow,
  PoroExternal,
  FluidSymmetry,
};

const char* to_string(BoundaryTag tag);

enum class DomainLabel { Fluid, Poroelastic };

/// How each structured grid cell is split into two triangles.
enum class DiagonalRule {
  LowerLeft,    // diagonal from the lower-left to the upper-right corner
  LowerRight,   // diagonal from the lower-right to the upper-left corner
  Alternating,  // checkerboard of both orientations
};

struct Edge {
  std::array<int, 2> v{};                // v[0] < v[1]
  std::array<int, 2> cells{-1, -1};      // cells[1] == -1 on the boundary
  bool on_boundary() const { return cells[1] < 0; }
};

/// Triangulation of one subdomain. Immutable once built and tagged.
///
/// Local edge k of a triangle joins its local vertices k and (k+1)%3, and
/// triangles are stored counterclockwise.
struct TriMesh {
  std::vector<Point2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Edge> edges;
  std::vector<std::array<int, 3>> triangle_edges;
  std::vector<std::optional<BoundaryTag>> edge_tags;
  DomainLabel domain = DomainLabel::Fluid;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }

  double signed_area(int cell) const;
  Point2 edge_midpoint(int e) const;
  double edge_length(int e) const;
  /// Outward unit normal of `cell` across its boundary edge `e`.
  Point2 outward_normal(int cell, int e) const;
  std::vector<int> edges_with_tag(BoundaryTag tag) const;
};

TriMesh build_rect_mesh(double x0, double x1, double y0, double y1, int nx, int ny,
                        DiagonalRule diagonal = DiagonalRule::LowerLeft,
                        DomainLabel domain = DomainLabel::Fluid);

/// Geometric predicate evaluated on the two endpoints of a boundary edge.
using EdgePredicate = std::function<bool(Point2, Point2)>;
using TagRule = std::pair<EdgePredicate, BoundaryTag>;

/// Assigns one tag to every boundary edge. Exactly one rule must match each
/// boundary edge; previous tags are discarded.
TriMesh tag_boundaries(TriMesh mesh, const std::vector<TagRule>& rules);

namespace predicates {
EdgePredicate on_line_x(double x, double tol = 1e-12);
EdgePredicate on_line_y(double y, double tol = 1e-12);
}  // namespace predicates

struct InterfaceSegment {
  Point2 a;  // endpoints ordered by increasing arc coordinate
  Point2 b;
  int fluid_edge = -1;
  int poro_edge = -1;
  int fluid_cell = -1;
  int poro_cell = -1;
  double length() const;
};

/// Matched fluid/poroelastic interface. Flat, so one normal pair per segment.
struct InterfaceMesh {
  std::vector<InterfaceSegment> segments;
  Point2 normal_f;
  Point2 normal_p;
  Point2 tangent_f;  // tangent_p == -tangent_f
  Point2 origin;     // arc coordinate reference point

  int n_segments() const { return static_cast<int>(segments.size()); }
  Point2 tangent_p() const { return {-tangent_f.x, -tangent_f.y}; }
  double arc_coordinate(Point2 p) const { return dot(p - origin, tangent_f); }
  double total_length() const;
};

InterfaceMesh extract_interface(const TriMesh& fluid, const TriMesh& poro);

void write_vtk_mesh(std::ostream& out, const TriMesh& mesh, const std::string& title = "mesh");

}  // namespace fpsi
