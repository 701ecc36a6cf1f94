// mesh.cpp

#include "mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace ep {

namespace {

// Builds neighbor connectivity and sanity-checks the face invariants:
// every interior face is shared by exactly two cells, every boundary face
// carries a tag.
void build_connectivity(Mesh &mesh) {
  const int nf = mesh.faces_per_cell();
  const int nc = mesh.n_cells();
  mesh.neighbor.assign(nc * nf, {-1, -1});

  std::map<std::pair<int, int>, std::pair<int, int>> open_faces;
  for (int c = 0; c < nc; ++c) {
    for (int lf = 0; lf < nf; ++lf) {
      const auto fv = mesh.face_vertices(lf);
      int a = mesh.cells[c][fv[0]];
      int b = mesh.cells[c][fv[1]];
      const auto key = std::minmax(a, b);
      auto it = open_faces.find(key);
      if (it == open_faces.end()) {
        open_faces[key] = {c, lf};
      } else {
        const auto [c2, lf2] = it->second;
        mesh.neighbor[c * nf + lf] = {c2, lf2};
        mesh.neighbor[c2 * nf + lf2] = {c, lf};
        open_faces.erase(it);
      }
    }
  }
  for (const auto &[key, cf] : open_faces) {
    const int face = cf.first * nf + cf.second;
    if (mesh.boundary_tag[face] < 0)
      throw Error("mesh: untagged boundary face on cell " + std::to_string(cf.first));
  }
  // Interior faces must not carry boundary tags.
  for (int c = 0; c < nc; ++c)
    for (int lf = 0; lf < nf; ++lf)
      if (mesh.neighbor[c * nf + lf][0] >= 0 && mesh.boundary_tag[c * nf + lf] >= 0)
        throw Error("mesh: interior face carries a boundary tag");

  mesh.vertex_on_boundary.assign(mesh.n_vertices(), 0);
  for (int c = 0; c < nc; ++c)
    for (int lf = 0; lf < nf; ++lf)
      if (mesh.neighbor[c * nf + lf][0] < 0) {
        const auto fv = mesh.face_vertices(lf);
        mesh.vertex_on_boundary[mesh.cells[c][fv[0]]] = 1;
        mesh.vertex_on_boundary[mesh.cells[c][fv[1]]] = 1;
      }
}

double polygon_area(const Mesh &mesh, int c) {
  const int nv = mesh.vertices_per_cell();
  double a = 0.0;
  for (int k = 0; k < nv; ++k) {
    const Vec2 &p = mesh.vertices[mesh.cells[c][k]];
    const Vec2 &q = mesh.vertices[mesh.cells[c][(k + 1) % nv]];
    a += cross(p, q);
  }
  return 0.5 * a;
}

}  // namespace

double Mesh::cell_area(int c) const { return polygon_area(*this, c); }

double Mesh::total_area() const {
  double a = 0.0;
  for (int c = 0; c < n_cells(); ++c)
    a += cell_area(c);
  return a;
}

double Mesh::min_incident_edge(int v) const {
  const int nv = vertices_per_cell();
  double h = std::numeric_limits<double>::max();
  for (int c = 0; c < n_cells(); ++c) {
    for (int k = 0; k < nv; ++k) {
      const int a = cells[c][k];
      const int b = cells[c][(k + 1) % nv];
      if (a == v || b == v)
        h = std::min(h, norm(vertices[a] - vertices[b]));
    }
  }
  return h;
}

const std::array<Vec2, 4> &reference_nodes(CellKind kind, int &count) {
  static const std::array<Vec2, 4> quad = {Vec2{0, 0}, Vec2{1, 0}, Vec2{1, 1}, Vec2{0, 1}};
  static const std::array<Vec2, 4> tri = {Vec2{0, 0}, Vec2{1, 0}, Vec2{0, 1}, Vec2{0, 0}};
  if (kind == CellKind::quad) {
    count = 4;
    return quad;
  }
  count = 3;
  return tri;
}

CellMap CellMap::from(const Mesh &mesh, int cell) {
  CellMap m;
  m.kind = mesh.cell_kind;
  const int nv = mesh.vertices_per_cell();
  for (int k = 0; k < nv; ++k)
    m.p[k] = mesh.vertices[mesh.cells[cell][k]];
  if (nv == 3)
    m.p[3] = Vec2{};
  return m;
}

Vec2 CellMap::map(double xr, double yr) const {
  if (kind == CellKind::triangle)
    return p[0] + xr * (p[1] - p[0]) + yr * (p[2] - p[0]);
  const double s0 = (1 - xr) * (1 - yr), s1 = xr * (1 - yr), s2 = xr * yr, s3 = (1 - xr) * yr;
  return s0 * p[0] + s1 * p[1] + s2 * p[2] + s3 * p[3];
}

void CellMap::jacobian(double xr, double yr, Vec2 &jx, Vec2 &jy) const {
  if (kind == CellKind::triangle) {
    jx = p[1] - p[0];
    jy = p[2] - p[0];
    return;
  }
  jx = (1 - yr) * (p[1] - p[0]) + yr * (p[2] - p[3]);
  jy = (1 - xr) * (p[3] - p[0]) + xr * (p[2] - p[1]);
}

double CellMap::det_jacobian(double xr, double yr) const {
  Vec2 jx, jy;
  jacobian(xr, yr, jx, jy);
  return cross(jx, jy);
}

Vec2 CellMap::inverse_map(const Vec2 &x) const {
  if (kind == CellKind::triangle) {
    const Vec2 e1 = p[1] - p[0], e2 = p[2] - p[0], r = x - p[0];
    const double det = cross(e1, e2);
    return Vec2{cross(r, e2) / det, cross(e1, r) / det};
  }
  Vec2 ref{0.5, 0.5};
  for (int it = 0; it < 30; ++it) {
    const Vec2 r = map(ref.x, ref.y) - x;
    Vec2 jx, jy;
    jacobian(ref.x, ref.y, jx, jy);
    const double det = cross(jx, jy);
    const Vec2 d{(r.x * jy.y - r.y * jy.x) / det, (jx.x * r.y - jx.y * r.x) / det};
    ref -= d;
    if (std::abs(d.x) + std::abs(d.y) < 1e-14)
      break;
  }
  return ref;
}

bool all_jacobians_positive(const Mesh &mesh) {
  int count = 0;
  const auto &nodes = reference_nodes(mesh.cell_kind, count);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellMap m = CellMap::from(mesh, c);
    for (int k = 0; k < count; ++k)
      if (m.det_jacobian(nodes[k].x, nodes[k].y) <= 0.0)
        return false;
  }
  return true;
}

Mesh build_rect_grid(Vec2 lower, Vec2 upper, int nx, int ny) {
  if (nx < 1 || ny < 1)
    throw InvalidDomainError("build_rect_grid: nx, ny must be >= 1");
  if (!(upper.x > lower.x) || !(upper.y > lower.y))
    throw InvalidDomainError("build_rect_grid: domain must have positive extent");

  Mesh mesh;
  mesh.cell_kind = CellKind::quad;
  mesh.vertices.resize((nx + 1) * (ny + 1));
  const double hx = (upper.x - lower.x) / nx;
  const double hy = (upper.y - lower.y) / ny;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      mesh.vertices[j * (nx + 1) + i] = Vec2{lower.x + i * hx, lower.y + j * hy};

  mesh.cells.reserve(nx * ny);
  mesh.boundary_tag.assign(static_cast<std::size_t>(nx) * ny * 4, -1);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int v0 = j * (nx + 1) + i;
      const int c = static_cast<int>(mesh.cells.size());
      mesh.cells.push_back({v0, v0 + 1, v0 + nx + 2, v0 + nx + 1});
      if (j == 0) mesh.boundary_tag[c * 4 + 0] = tag::bottom;
      if (i == nx - 1) mesh.boundary_tag[c * 4 + 1] = tag::right;
      if (j == ny - 1) mesh.boundary_tag[c * 4 + 2] = tag::top;
      if (i == 0) mesh.boundary_tag[c * 4 + 3] = tag::left;
    }
  }
  mesh.parent_cell.assign(mesh.n_cells(), -1);
  build_connectivity(mesh);
  return mesh;
}

Mesh distort_vertices(const Mesh &mesh, double amplitude, std::uint64_t seed) {
  if (amplitude < 0.0 || amplitude >= 0.25)
    throw ConfigError("distort_vertices: amplitude must lie in [0, 0.25)");

  Mesh out = mesh;
  if (amplitude == 0.0)
    return out;

  Rng rng(seed);
  std::vector<Vec2> displacement(mesh.n_vertices(), Vec2{});
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    // Draw for every vertex so the pattern is independent of which vertices
    // end up on the boundary.
    const double dx = rng.symmetric();
    const double dy = rng.symmetric();
    if (mesh.vertex_on_boundary[v])
      continue;  // boundary vertices are held fixed, keeping the domain exact
    const double h = mesh.min_incident_edge(v);
    displacement[v] = Vec2{amplitude * h * dx, amplitude * h * dy};
  }

  auto apply = [&] {
    for (int v = 0; v < mesh.n_vertices(); ++v)
      out.vertices[v] = mesh.vertices[v] + displacement[v];
  };
  apply();

  int count = 0;
  const auto &nodes = reference_nodes(mesh.cell_kind, count);
  std::vector<std::uint8_t> reduced(mesh.n_vertices(), 0);
  for (int round = 0; round < 60; ++round) {
    bool ok = true;
    for (int c = 0; c < out.n_cells(); ++c) {
      const CellMap m = CellMap::from(out, c);
      bool inverted = false;
      for (int k = 0; k < count; ++k)
        if (m.det_jacobian(nodes[k].x, nodes[k].y) <= 0.0)
          inverted = true;
      if (inverted) {
        ok = false;
        for (int k = 0; k < out.vertices_per_cell(); ++k) {
          const int v = out.cells[c][k];
          displacement[v] *= 0.5;
          reduced[v] = 1;
        }
      }
    }
    if (ok)
      break;
    apply();
  }
  for (auto r : reduced)
    out.distortion_warnings += r;
  if (!all_jacobians_positive(out))
    throw Error("distort_vertices: could not restore Jacobian positivity");
  return out;
}

Mesh refine_nested(const Mesh &mesh) {
  Mesh out;
  out.cell_kind = mesh.cell_kind;
  out.vertices = mesh.vertices;
  out.refinement_level = mesh.refinement_level + 1;

  std::map<std::pair<int, int>, int> midpoint;
  auto edge_mid = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end())
      return it->second;
    const int v = static_cast<int>(out.vertices.size());
    out.vertices.push_back(0.5 * (mesh.vertices[a] + mesh.vertices[b]));
    midpoint[key] = v;
    return v;
  };

  const int nf = mesh.faces_per_cell();
  if (mesh.cell_kind == CellKind::quad) {
    out.boundary_tag.assign(static_cast<std::size_t>(mesh.n_cells()) * 4 * 4, -1);
    for (int c = 0; c < mesh.n_cells(); ++c) {
      const auto &cv = mesh.cells[c];
      const int m01 = edge_mid(cv[0], cv[1]);
      const int m12 = edge_mid(cv[1], cv[2]);
      const int m23 = edge_mid(cv[2], cv[3]);
      const int m30 = edge_mid(cv[3], cv[0]);
      const int ctr = static_cast<int>(out.vertices.size());
      out.vertices.push_back(0.25 * (mesh.vertices[cv[0]] + mesh.vertices[cv[1]] +
                                     mesh.vertices[cv[2]] + mesh.vertices[cv[3]]));
      const std::array<std::array<int, 4>, 4> children = {{{cv[0], m01, ctr, m30},
                                                           {m01, cv[1], m12, ctr},
                                                           {m30, ctr, m23, cv[3]},
                                                           {ctr, m12, cv[2], m23}}};
      // Child faces that are halves of a parent face inherit its tag.
      // children[k] local faces mapping onto parent faces:
      //   child 0: f0 -> parent f0, f3 -> parent f3
      //   child 1: f0 -> parent f0, f1 -> parent f1
      //   child 2: f2 -> parent f2, f3 -> parent f3
      //   child 3: f1 -> parent f1, f2 -> parent f2
      const int base = static_cast<int>(out.cells.size());
      for (const auto &ch : children) {
        out.cells.push_back(ch);
        out.parent_cell.push_back(c);
      }
      const int t0 = mesh.boundary_tag[c * nf + 0];
      const int t1 = mesh.boundary_tag[c * nf + 1];
      const int t2 = mesh.boundary_tag[c * nf + 2];
      const int t3 = mesh.boundary_tag[c * nf + 3];
      out.boundary_tag[(base + 0) * 4 + 0] = t0;
      out.boundary_tag[(base + 1) * 4 + 0] = t0;
      out.boundary_tag[(base + 1) * 4 + 1] = t1;
      out.boundary_tag[(base + 3) * 4 + 1] = t1;
      out.boundary_tag[(base + 3) * 4 + 2] = t2;
      out.boundary_tag[(base + 2) * 4 + 2] = t2;
      out.boundary_tag[(base + 2) * 4 + 3] = t3;
      out.boundary_tag[(base + 0) * 4 + 3] = t3;
    }
  } else {
    out.boundary_tag.assign(static_cast<std::size_t>(mesh.n_cells()) * 4 * 3, -1);
    for (int c = 0; c < mesh.n_cells(); ++c) {
      const auto &cv = mesh.cells[c];
      const int m01 = edge_mid(cv[0], cv[1]);
      const int m12 = edge_mid(cv[1], cv[2]);
      const int m20 = edge_mid(cv[2], cv[0]);
      const std::array<std::array<int, 4>, 4> children = {{{cv[0], m01, m20, -1},
                                                           {m01, cv[1], m12, -1},
                                                           {m20, m12, cv[2], -1},
                                                           {m01, m12, m20, -1}}};
      const int base = static_cast<int>(out.cells.size());
      for (const auto &ch : children) {
        out.cells.push_back(ch);
        out.parent_cell.push_back(c);
      }
      const int t0 = mesh.boundary_tag[c * nf + 0];
      const int t1 = mesh.boundary_tag[c * nf + 1];
      const int t2 = mesh.boundary_tag[c * nf + 2];
      out.boundary_tag[(base + 0) * 3 + 0] = t0;
      out.boundary_tag[(base + 1) * 3 + 0] = t0;
      out.boundary_tag[(base + 1) * 3 + 1] = t1;
      out.boundary_tag[(base + 2) * 3 + 1] = t1;
      out.boundary_tag[(base + 2) * 3 + 2] = t2;
      out.boundary_tag[(base + 0) * 3 + 2] = t2;
    }
  }
  build_connectivity(out);
  if (!all_jacobians_positive(out))
    throw Error("refine_nested: refinement produced an inverted cell");
  return out;
}

// Quad mesh of the disk |x| <= radius: an n x n center square plus a ring of
// 4n x n cells.  Ring vertices blend linearly between the square side and
// the circle, so boundary vertices land on the circle exactly.
Mesh build_disk_grid(double radius, int target_cells) {
  if (!(radius > 0.0))
    throw InvalidDomainError("build_disk_grid: radius must be positive");
  if (target_cells < 5)
    throw ConfigError("build_disk_grid: need a target of at least 5 cells");

  // 5 n^2 cells total; pick n so the count is closest to target in ratio,
  // which keeps it within a factor of 2.
  int n = std::max(1, static_cast<int>(std::floor(std::sqrt(target_cells / 5.0))));
  {
    const double r_lo = static_cast<double>(target_cells) / (5.0 * n * n);
    const double r_hi = 5.0 * (n + 1.0) * (n + 1.0) / target_cells;
    if (r_hi < r_lo)
      ++n;
  }

  // Square corners sit at radius/2.
  const double b = 0.5 * radius / std::sqrt(2.0);

  Mesh mesh;
  mesh.cell_kind = CellKind::quad;

  // Center square vertices, (n+1)^2.
  auto v_sq = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      mesh.vertices.push_back(Vec2{-b + 2.0 * b * i / n, -b + 2.0 * b * j / n});

  // Square boundary vertex at ring position k (counterclockwise, k=0 at the
  // bottom-right corner (b,-b)).
  auto v_rim = [&](int k) {
    k = ((k % (4 * n)) + 4 * n) % (4 * n);
    if (k <= n) return v_sq(n, k);
    if (k <= 2 * n) return v_sq(2 * n - k, n);
    if (k <= 3 * n) return v_sq(0, 3 * n - k);
    return v_sq(k - 3 * n, 0);
  };

  // Ring layers t=1..n, each with 4n vertices.
  const int ring_base = static_cast<int>(mesh.vertices.size());
  auto v_ring = [&](int k, int t) {
    k = ((k % (4 * n)) + 4 * n) % (4 * n);
    return t == 0 ? v_rim(k) : ring_base + (t - 1) * 4 * n + k;
  };
  for (int t = 1; t <= n; ++t) {
    const double s = static_cast<double>(t) / n;
    for (int k = 0; k < 4 * n; ++k) {
      const double theta = -0.25 * M_PI + 0.5 * M_PI * static_cast<double>(k) / n;
      const Vec2 arc{radius * std::cos(theta), radius * std::sin(theta)};
      const Vec2 inner = mesh.vertices[v_rim(k)];
      mesh.vertices.push_back((1.0 - s) * inner + s * arc);
    }
  }

  const int n_cells = 5 * n * n;
  mesh.boundary_tag.assign(static_cast<std::size_t>(n_cells) * 4, -1);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      mesh.cells.push_back({v_sq(i, j), v_sq(i + 1, j), v_sq(i + 1, j + 1), v_sq(i, j + 1)});
    }
  for (int t = 0; t < n; ++t)
    for (int k = 0; k < 4 * n; ++k) {
      const int c = static_cast<int>(mesh.cells.size());
      mesh.cells.push_back({v_ring(k, t), v_ring(k, t + 1), v_ring(k + 1, t + 1), v_ring(k + 1, t)});
      if (t + 1 == n)
        mesh.boundary_tag[c * 4 + 1] = tag::circle;
    }

  mesh.parent_cell.assign(mesh.n_cells(), -1);
  build_connectivity(mesh);
  if (!all_jacobians_positive(mesh))
    throw Error("build_disk_grid: inverted cell in disk layout");
  return mesh;
}

Mesh split_to_triangles(const Mesh &mesh) {
  if (mesh.cell_kind != CellKind::quad)
    throw ConfigError("split_to_triangles: input must be a quad mesh");
  Mesh out;
  out.cell_kind = CellKind::triangle;
  out.vertices = mesh.vertices;
  out.refinement_level = mesh.refinement_level;
  out.boundary_tag.assign(static_cast<std::size_t>(mesh.n_cells()) * 2 * 3, -1);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto &cv = mesh.cells[c];
    const int base = static_cast<int>(out.cells.size());
    out.cells.push_back({cv[0], cv[1], cv[2], -1});
    out.cells.push_back({cv[0], cv[2], cv[3], -1});
    out.parent_cell.push_back(c);
    out.parent_cell.push_back(c);
    // quad faces: 0:(v0,v1) 1:(v1,v2) 2:(v2,v3) 3:(v3,v0)
    out.boundary_tag[(base + 0) * 3 + 0] = mesh.boundary_tag[c * 4 + 0];
    out.boundary_tag[(base + 0) * 3 + 1] = mesh.boundary_tag[c * 4 + 1];
    out.boundary_tag[(base + 1) * 3 + 1] = mesh.boundary_tag[c * 4 + 2];
    out.boundary_tag[(base + 1) * 3 + 2] = mesh.boundary_tag[c * 4 + 3];
  }
  build_connectivity(out);
  return out;
}

PeriodicPairs match_periodic_faces(const Mesh &mesh, int tag_a, int tag_b) {
  const int nf = mesh.faces_per_cell();
  std::vector<int> faces_a, faces_b;
  for (int c = 0; c < mesh.n_cells(); ++c)
    for (int lf = 0; lf < nf; ++lf) {
      if (mesh.boundary_tag[c * nf + lf] == tag_a)
        faces_a.push_back(c * nf + lf);
      else if (mesh.boundary_tag[c * nf + lf] == tag_b)
        faces_b.push_back(c * nf + lf);
    }
  if (faces_a.size() != faces_b.size() || faces_a.empty())
    throw ConfigError("match_periodic_faces: sides do not pair up");

  auto face_center = [&](int face) {
    const int c = face / nf, lf = face % nf;
    const auto fv = mesh.face_vertices(lf);
    return 0.5 * (mesh.vertices[mesh.cells[c][fv[0]]] + mesh.vertices[mesh.cells[c][fv[1]]]);
  };

  // The translation is shared by all pairs; take it from the bounding boxes.
  Vec2 lo_a{1e300, 1e300}, lo_b{1e300, 1e300};
  for (int f : faces_a) {
    const Vec2 c = face_center(f);
    lo_a.x = std::min(lo_a.x, c.x);
    lo_a.y = std::min(lo_a.y, c.y);
  }
  for (int f : faces_b) {
    const Vec2 c = face_center(f);
    lo_b.x = std::min(lo_b.x, c.x);
    lo_b.y = std::min(lo_b.y, c.y);
  }
  const Vec2 shift = lo_b - lo_a;

  PeriodicPairs out;
  out.shift = shift;
  double tol = 0.0;
  for (int f : faces_a)
    tol = std::max(tol, norm(face_center(f)));
  tol = std::max(tol, 1.0) * 1e-9;

  for (int fa : faces_a) {
    const Vec2 target = face_center(fa) + shift;
    int found = -1;
    for (int fb : faces_b)
      if (norm(face_center(fb) - target) < tol) {
        found = fb;
        break;
      }
    if (found < 0)
      throw ConfigError("match_periodic_faces: unmatched periodic face");
    out.pairs.push_back({fa, found});
  }
  return out;
}

}  // namespace ep
