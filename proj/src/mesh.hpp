// mesh.hpp
// 2d quadrilateral / affine-simplicial meshes: structured rectangle grids,
// random vertex distortion, nested bisection refinement, and a disk mesh
// built from a center square plus four transfinite ring blocks.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "core.hpp"

namespace ep {

enum class CellKind { quad, triangle };

// Boundary tags used by the structured builders.
namespace tag {
constexpr int left = 0;
constexpr int right = 1;
constexpr int bottom = 2;
constexpr int top = 3;
constexpr int circle = 4;
}  // namespace tag

struct Mesh {
  CellKind cell_kind = CellKind::quad;
  std::vector<Vec2> vertices;
  // Vertex tuples, counterclockwise.  Quads use all four entries, triangles
  // the first three (the fourth is -1).
  std::vector<std::array<int, 4>> cells;
  // boundary_tag[cell * faces_per_cell + lf]: tag of a boundary face, or -1
  // for interior faces.
  std::vector<int> boundary_tag;
  // neighbor[cell * faces_per_cell + lf] = (neighbor cell, neighbor local
  // face), or (-1,-1) on the boundary.
  std::vector<std::array<int, 2>> neighbor;
  std::vector<std::uint8_t> vertex_on_boundary;
  std::vector<int> parent_cell;  // refinement lineage, -1 for base cells
  int refinement_level = 0;
  int distortion_warnings = 0;

  int n_cells() const { return static_cast<int>(cells.size()); }
  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int vertices_per_cell() const { return cell_kind == CellKind::quad ? 4 : 3; }
  int faces_per_cell() const { return vertices_per_cell(); }

  // Endpoints (local vertex indices) of local face lf.
  std::array<int, 2> face_vertices(int lf) const {
    const int nv = vertices_per_cell();
    return {lf, (lf + 1) % nv};
  }

  double cell_area(int c) const;
  double total_area() const;
  // Shortest edge among the edges incident to vertex v.
  double min_incident_edge(int v) const;
};

// Reference-to-physical map of one cell (bilinear for quads, affine for
// triangles).  Reference domain is the unit square / unit triangle.
struct CellMap {
  CellKind kind;
  std::array<Vec2, 4> p;  // physical corner coordinates

  static CellMap from(const Mesh &mesh, int cell);

  Vec2 map(double xr, double yr) const;
  // Jacobian columns d(x)/d(xr), d(x)/d(yr).
  void jacobian(double xr, double yr, Vec2 &jx, Vec2 &jy) const;
  double det_jacobian(double xr, double yr) const;
  // Newton inverse for quads, closed form for affine triangles.
  Vec2 inverse_map(const Vec2 &x) const;
  bool affine() const { return kind == CellKind::triangle; }
};

// Reference coordinates of the interpolation nodes (cell corners).
const std::array<Vec2, 4> &reference_nodes(CellKind kind, int &count);

Mesh build_rect_grid(Vec2 lower, Vec2 upper, int nx, int ny);
Mesh distort_vertices(const Mesh &mesh, double amplitude, std::uint64_t seed);
Mesh refine_nested(const Mesh &mesh);
Mesh build_disk_grid(double radius, int target_cells);
// Splits every quad into two triangles along the v0-v2 diagonal; the result
// is affine by construction when applied to rectangle grids.
Mesh split_to_triangles(const Mesh &mesh);

// True if every cell has positive Jacobian determinant at all reference
// interpolation nodes.
bool all_jacobians_positive(const Mesh &mesh);

// Matched periodic face pairs (face = cell * faces_per_cell + lf) for two
// opposite boundary tags; used by the divergence-graph assembly.
struct PeriodicPairs {
  // Each entry: {face_a, face_b}; b is a's translate by `shift`.
  std::vector<std::array<int, 2>> pairs;
  Vec2 shift;  // translation taking side a onto side b
};

PeriodicPairs match_periodic_faces(const Mesh &mesh, int tag_a, int tag_b);

}  // namespace ep
