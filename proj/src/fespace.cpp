// fespace.cpp

#include "fespace.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace ep {

namespace {

struct QuadratureRule {
  int n = 0;
  Vec2 pts[4];
  double wts[4];
};

// Tensor Gauss, 2 points per direction on [0,1]^2: exact for the bilinear
// geometry factors of Q1 cells.
const QuadratureRule &cell_rule(CellKind kind) {
  static const QuadratureRule quad = [] {
    QuadratureRule r;
    r.n = 4;
    const double a = 0.5 - 0.5 / std::sqrt(3.0), b = 0.5 + 0.5 / std::sqrt(3.0);
    r.pts[0] = {a, a};
    r.pts[1] = {b, a};
    r.pts[2] = {b, b};
    r.pts[3] = {a, b};
    r.wts[0] = r.wts[1] = r.wts[2] = r.wts[3] = 0.25;
    return r;
  }();
  static const QuadratureRule tri = [] {
    QuadratureRule r;
    r.n = 3;
    r.pts[0] = {0.5, 0.0};
    r.pts[1] = {0.5, 0.5};
    r.pts[2] = {0.0, 0.5};
    r.wts[0] = r.wts[1] = r.wts[2] = 1.0 / 6.0;
    return r;
  }();
  return kind == CellKind::quad ? quad : tri;
}

int nodes_per_cell(CellKind kind) { return kind == CellKind::quad ? 4 : 3; }

void shape_values(CellKind kind, double x, double y, double *phi) {
  if (kind == CellKind::quad) {
    phi[0] = (1 - x) * (1 - y);
    phi[1] = x * (1 - y);
    phi[2] = x * y;
    phi[3] = (1 - x) * y;
  } else {
    phi[0] = 1 - x - y;
    phi[1] = x;
    phi[2] = y;
  }
}

void shape_grads(CellKind kind, double x, double y, Vec2 *g) {
  if (kind == CellKind::quad) {
    g[0] = {-(1 - y), -(1 - x)};
    g[1] = {1 - y, -x};
    g[2] = {y, x};
    g[3] = {-y, 1 - x};
  } else {
    g[0] = {-1, -1};
    g[1] = {1, 0};
    g[2] = {0, 1};
  }
}

// adj(J)^T v, with J given by columns jx, jy.
inline Vec2 adjT(const Vec2 &jx, const Vec2 &jy, const Vec2 &v) {
  return Vec2{jy.y * v.x - jx.y * v.y, -jy.x * v.x + jx.x * v.y};
}

}  // namespace

PotentialSpace PotentialSpace::build(const Mesh &mesh) {
  PotentialSpace s;
  s.mesh = &mesh;
  s.n_dofs = mesh.n_vertices();
  s.lumped_mass.assign(s.n_dofs, 0.0);
  s.on_boundary = mesh.vertex_on_boundary;

  const int nv = nodes_per_cell(mesh.cell_kind);
  const auto &rule = cell_rule(mesh.cell_kind);
  double phi[4];
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellMap map = CellMap::from(mesh, c);
    for (int q = 0; q < rule.n; ++q) {
      const double det = map.det_jacobian(rule.pts[q].x, rule.pts[q].y);
      shape_values(mesh.cell_kind, rule.pts[q].x, rule.pts[q].y, phi);
      for (int k = 0; k < nv; ++k)
        s.lumped_mass[mesh.cells[c][k]] += rule.wts[q] * phi[k] * det;
    }
  }
  for (double m : s.lumped_mass)
    s.domain_area += m;
  return s;
}

HydroSpace HydroSpace::build(const Mesh &mesh) {
  HydroSpace s;
  s.mesh = &mesh;
  s.nodes_per_cell = nodes_per_cell(mesh.cell_kind);
  s.n_dofs = mesh.n_cells() * s.nodes_per_cell;
  s.node_coords.resize(s.n_dofs);
  s.lumped_mass.assign(s.n_dofs, 0.0);

  int n_ref = 0;
  const auto &ref = reference_nodes(mesh.cell_kind, n_ref);
  const auto &rule = cell_rule(mesh.cell_kind);
  double phi[4];
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellMap map = CellMap::from(mesh, c);
    for (int k = 0; k < n_ref; ++k)
      s.node_coords[c * n_ref + k] = map.map(ref[k].x, ref[k].y);
    for (int q = 0; q < rule.n; ++q) {
      const double det = map.det_jacobian(rule.pts[q].x, rule.pts[q].y);
      shape_values(mesh.cell_kind, rule.pts[q].x, rule.pts[q].y, phi);
      for (int k = 0; k < n_ref; ++k)
        s.lumped_mass[c * n_ref + k] += rule.wts[q] * phi[k] * det;
    }
  }
  for (double m : s.lumped_mass) {
    if (!(m > 0.0))
      throw Error("HydroSpace: nonpositive lumped mass");
    s.domain_area += m;
  }
  return s;
}

double lumped_inner(const HydroSpace &space, const std::vector<double> &f, const std::vector<double> &g) {
  if (static_cast<int>(f.size()) != space.n_dofs || static_cast<int>(g.size()) != space.n_dofs)
    throw ConfigError("lumped_inner: field size does not match the space");
  double sum = 0.0;
  for (int i = 0; i < space.n_dofs; ++i)
    sum += f[i] * g[i] * space.lumped_mass[i];
  return sum;
}

double lumped_inner(const HydroSpace &space, const std::function<double(Vec2)> &f,
                    const std::function<double(Vec2)> &g) {
  double sum = 0.0;
  for (int i = 0; i < space.n_dofs; ++i)
    sum += f(space.node_coords[i]) * g(space.node_coords[i]) * space.lumped_mass[i];
  return sum;
}

DivergenceGraph assemble_divergence_graph(const Mesh &mesh, const HydroSpace &space,
                                          const std::vector<PeriodicPairs> &periodic) {
  const int nv = space.nodes_per_cell;
  const int nf = mesh.faces_per_cell();
  const int n = space.n_dofs;

  struct Entry {
    Vec2 c{};
    bool coincident = false;
  };
  std::vector<std::map<int, Entry>> rows(n);
  std::vector<Vec2> cii(n, Vec2{});

  // Volume terms c^K_ij = int_K phi_i grad phi_j.
  const auto &rule = cell_rule(mesh.cell_kind);
  double phi[4];
  Vec2 gref[4];
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellMap map = CellMap::from(mesh, c);
    double cK[4][4][2] = {};
    for (int q = 0; q < rule.n; ++q) {
      shape_values(mesh.cell_kind, rule.pts[q].x, rule.pts[q].y, phi);
      shape_grads(mesh.cell_kind, rule.pts[q].x, rule.pts[q].y, gref);
      Vec2 jx, jy;
      map.jacobian(rule.pts[q].x, rule.pts[q].y, jx, jy);
      for (int a = 0; a < nv; ++a) {
        for (int b = 0; b < nv; ++b) {
          const Vec2 gb = adjT(jx, jy, gref[b]);
          cK[a][b][0] += rule.wts[q] * phi[a] * gb.x;
          cK[a][b][1] += rule.wts[q] * phi[a] * gb.y;
        }
      }
    }
    for (int a = 0; a < nv; ++a)
      for (int b = 0; b < nv; ++b) {
        const int i = c * nv + a, j = c * nv + b;
        const Vec2 v{cK[a][b][0], cK[a][b][1]};
        if (i == j)
          cii[i] += v;
        else
          rows[i][j].c += v;
      }
  }

  // Face terms: for each face of cell K not on the domain boundary,
  //   c_ij -= 1/2 int_f phi_i phi_j n_K   for j in the same cell,
  //   c_ij += 1/2 int_f phi_i phi_j n_K   for j in the cell across the face.
  // Traces along a straight face are linear, so the integrals are L/3
  // (matching endpoints) and L/6 (opposite endpoints).
  auto process_face = [&](int c, int lf, int c2, int lf2, const Vec2 &shift) {
    const auto fv = mesh.face_vertices(lf);
    const auto fv2 = mesh.face_vertices(lf2);
    const int i0 = c * nv + fv[0], i1 = c * nv + fv[1];            // this cell's face nodes
    const int j0 = c2 * nv + fv2[0], j1 = c2 * nv + fv2[1];        // neighbor's face nodes

    const Vec2 p0 = space.node_coords[i0], p1 = space.node_coords[i1];
    const double L = norm(p1 - p0);
    // Outward normal of cell c on this face (counterclockwise cells).
    const Vec2 t = p1 - p0;
    const Vec2 n{t.y / L, -t.x / L};

    // Match neighbor nodes to ours geometrically (handles periodic images).
    const double tol = 1e-9 * std::max(L, 1.0);
    const Vec2 q0 = space.node_coords[j0] - shift, q1 = space.node_coords[j1] - shift;
    const bool straight = norm(q0 - p0) < tol;
    if (!straight && norm(q1 - p0) >= tol)
      throw Error("assemble_divergence_graph: face nodes do not match across a face");
    const int jm0 = straight ? j0 : j1;  // coincident with i0
    const int jm1 = straight ? j1 : j0;  // coincident with i1

    const Vec2 n3 = (L / 3.0) * 0.5 * n;
    const Vec2 n6 = (L / 6.0) * 0.5 * n;

    // Same-cell contributions (subtract).
    cii[i0] -= n3;
    cii[i1] -= n3;
    rows[i0][i1].c -= n6;
    rows[i1][i0].c -= n6;
    // Neighbor contributions (add).
    auto &e00 = rows[i0][jm0];
    e00.c += n3;
    e00.coincident = true;
    auto &e11 = rows[i1][jm1];
    e11.c += n3;
    e11.coincident = true;
    rows[i0][jm1].c += n6;
    rows[i1][jm0].c += n6;
  };

  for (int c = 0; c < mesh.n_cells(); ++c)
    for (int lf = 0; lf < nf; ++lf) {
      const auto nb = mesh.neighbor[c * nf + lf];
      if (nb[0] >= 0)
        process_face(c, lf, nb[0], nb[1], Vec2{});
    }
  for (const auto &pp : periodic)
    for (const auto &pr : pp.pairs) {
      const int ca = pr[0] / nf, lfa = pr[0] % nf;
      const int cb = pr[1] / nf, lfb = pr[1] % nf;
      process_face(ca, lfa, cb, lfb, pp.shift);
      process_face(cb, lfb, ca, lfa, -1.0 * pp.shift);
    }

  // Symmetrize the stencil: j in I(i) iff i in I(j).
  for (int i = 0; i < n; ++i)
    for (const auto &[j, e] : rows[i])
      rows[j].try_emplace(i);

  DivergenceGraph g;
  g.n_nodes = n;
  g.mass = space.lumped_mass;
  g.cii = std::move(cii);
  g.row_start.assign(n + 1, 0);
  for (int i = 0; i < n; ++i)
    g.row_start[i + 1] = g.row_start[i] + static_cast<int>(rows[i].size());
  const int nnz = g.row_start[n];
  g.col.resize(nnz);
  g.cij.resize(nnz);
  g.cji.resize(nnz);
  g.coincident.resize(nnz);
  g.transpose_index.resize(nnz);

  for (int i = 0; i < n; ++i) {
    int pos = g.row_start[i];
    for (const auto &[j, e] : rows[i]) {
      g.col[pos] = j;
      g.cij[pos] = e.c;
      g.coincident[pos] = e.coincident || rows[j].at(i).coincident;
      ++pos;
    }
  }
  for (int i = 0; i < n; ++i)
    for (int p = g.row_start[i]; p < g.row_start[i + 1]; ++p) {
      const int j = g.col[p];
      const int q = static_cast<int>(
          std::lower_bound(g.col.begin() + g.row_start[j], g.col.begin() + g.row_start[j + 1], i) -
          g.col.begin());
      g.transpose_index[p] = q;
      g.cji[p] = g.cij[q];
    }
  return g;
}

int SparsePattern::find(int i, int j) const {
  for (int p = row_start[i]; p < row_start[i + 1]; ++p)
    if (col[p] == j)
      return p;
  return -1;
}

void SparseMatrix::mult(const std::vector<double> &x, std::vector<double> &y,
                        const std::vector<std::uint8_t> *constrained) const {
  const auto &pat = *pattern;
  y.resize(pat.n);
  parallel_for(pat.n, [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i) {
      if (constrained && (*constrained)[i]) {
        y[i] = x[i];
        continue;
      }
      double s = 0.0;
      for (int p = pat.row_start[i]; p < pat.row_start[i + 1]; ++p) {
        const int j = pat.col[p];
        if (constrained && (*constrained)[j])
          continue;
        s += vals[p] * x[j];
      }
      y[i] = s;
    }
  });
}

PotentialOperators PotentialOperators::build(const Mesh &mesh, const PotentialSpace &pot,
                                             const HydroSpace &hyd) {
  PotentialOperators ops;
  ops.mesh = &mesh;
  ops.pot = &pot;
  ops.hyd = &hyd;

  const int nv = hyd.nodes_per_cell;
  const int n = pot.n_dofs;

  // Pattern from vertex adjacency.
  std::vector<std::map<int, char>> adj(n);
  for (int c = 0; c < mesh.n_cells(); ++c)
    for (int a = 0; a < nv; ++a)
      for (int b = 0; b < nv; ++b)
        adj[mesh.cells[c][a]][mesh.cells[c][b]] = 1;
  ops.pattern.n = n;
  ops.pattern.row_start.assign(n + 1, 0);
  for (int i = 0; i < n; ++i)
    ops.pattern.row_start[i + 1] = ops.pattern.row_start[i] + static_cast<int>(adj[i].size());
  ops.pattern.col.reserve(ops.pattern.row_start[n]);
  for (int i = 0; i < n; ++i)
    for (const auto &[j, _] : adj[i])
      ops.pattern.col.push_back(j);

  // Local and global stiffness.
  ops.cell_stiffness.assign(static_cast<std::size_t>(mesh.n_cells()) * nv * nv, 0.0);
  ops.stiffness.pattern = &ops.pattern;
  ops.stiffness.vals.assign(ops.pattern.col.size(), 0.0);

  const auto &rule = cell_rule(mesh.cell_kind);
  Vec2 gref[4];
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellMap map = CellMap::from(mesh, c);
    double *S = &ops.cell_stiffness[static_cast<std::size_t>(c) * nv * nv];
    for (int q = 0; q < rule.n; ++q) {
      shape_grads(mesh.cell_kind, rule.pts[q].x, rule.pts[q].y, gref);
      Vec2 jx, jy;
      map.jacobian(rule.pts[q].x, rule.pts[q].y, jx, jy);
      const double det = cross(jx, jy);
      Vec2 gphys[4];
      for (int a = 0; a < nv; ++a)
        gphys[a] = adjT(jx, jy, gref[a]);
      for (int a = 0; a < nv; ++a)
        for (int b = 0; b < nv; ++b)
          S[a * nv + b] += rule.wts[q] * dot(gphys[a], gphys[b]) / det;
    }
    for (int a = 0; a < nv; ++a)
      for (int b = 0; b < nv; ++b) {
        const int p = ops.pattern.find(mesh.cells[c][a], mesh.cells[c][b]);
        ops.stiffness.vals[p] += S[a * nv + b];
      }
  }

  // Basis gradients at the interpolation nodes.
  int n_ref = 0;
  const auto &ref = reference_nodes(mesh.cell_kind, n_ref);
  ops.grad_basis.assign(static_cast<std::size_t>(hyd.n_dofs) * nv, Vec2{});
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellMap map = CellMap::from(mesh, c);
    for (int k = 0; k < n_ref; ++k) {
      shape_grads(mesh.cell_kind, ref[k].x, ref[k].y, gref);
      Vec2 jx, jy;
      map.jacobian(ref[k].x, ref[k].y, jx, jy);
      const double det = cross(jx, jy);
      for (int a = 0; a < nv; ++a) {
        const Vec2 g = adjT(jx, jy, gref[a]);
        ops.grad_basis[(static_cast<std::size_t>(c) * nv + k) * nv + a] = (1.0 / det) * g;
      }
    }
  }
  return ops;
}

void PotentialOperators::assemble_a_pm(double dt, double alpha, const std::vector<double> &rho,
                                       APMMode mode, SparseMatrix &a_plus, SparseMatrix &a_minus) const {
  for (int i = 0; i < hyd->n_dofs; ++i)
    if (!(rho[i] > 0.0))
      throw AdmissibilityError("assemble_a_pm: nonpositive density at node " + std::to_string(i), i,
                               rho[i], 0.0);

  const double coeff = dt * dt * alpha / 4.0;
  if (alpha < 0.0) {
    const double rho_max = *std::max_element(rho.begin(), rho.end());
    if (!(1.0 + coeff * rho_max > 0.0)) {
      const double dt_admissible = std::sqrt(-4.0 / (alpha * rho_max));
      throw StepSizeError("assemble_a_pm: dt violates 1 + (dt^2 alpha/4) max rho > 0; require dt < " +
                              std::to_string(dt_admissible),
                          dt_admissible);
    }
  }

  a_plus.pattern = &pattern;
  a_minus.pattern = &pattern;
  a_plus.vals = stiffness.vals;
  a_minus.vals = stiffness.vals;

  const Mesh &m = *mesh;
  const int nv = hyd->nodes_per_cell;
  const auto &rule = cell_rule(m.cell_kind);
  double phi[4];
  Vec2 gref[4];

  for (int c = 0; c < m.n_cells(); ++c) {
    double Mrho[4][4] = {};
    if (mode == APMMode::lumped) {
      // <rho grad chi_a, grad chi_b> with nodal weights w_{K,k}.
      for (int k = 0; k < nv; ++k) {
        const int dof = c * nv + k;
        const double w = rho[dof] * hyd->lumped_mass[dof];
        const Vec2 *g = &grad_basis[static_cast<std::size_t>(dof) * nv];
        for (int a = 0; a < nv; ++a)
          for (int b = 0; b < nv; ++b)
            Mrho[a][b] += w * dot(g[a], g[b]);
      }
    } else {
      const CellMap map = CellMap::from(m, c);
      for (int q = 0; q < rule.n; ++q) {
        shape_values(m.cell_kind, rule.pts[q].x, rule.pts[q].y, phi);
        shape_grads(m.cell_kind, rule.pts[q].x, rule.pts[q].y, gref);
        Vec2 jx, jy;
        map.jacobian(rule.pts[q].x, rule.pts[q].y, jx, jy);
        const double det = cross(jx, jy);
        double rho_q = 0.0;
        for (int k = 0; k < nv; ++k)
          rho_q += rho[c * nv + k] * phi[k];
        Vec2 gphys[4];
        for (int a = 0; a < nv; ++a)
          gphys[a] = adjT(jx, jy, gref[a]);
        for (int a = 0; a < nv; ++a)
          for (int b = 0; b < nv; ++b)
            Mrho[a][b] += rule.wts[q] * rho_q * dot(gphys[a], gphys[b]) / det;
      }
    }
    for (int a = 0; a < nv; ++a)
      for (int b = 0; b < nv; ++b) {
        const int p = pattern.find(m.cells[c][a], m.cells[c][b]);
        a_plus.vals[p] += coeff * Mrho[a][b];
        a_minus.vals[p] -= coeff * Mrho[a][b];
      }
  }
}

void PotentialOperators::momentum_load(const std::vector<double> &rho, const std::vector<Vec2> &v,
                                       std::vector<double> &rhs) const {
  rhs.assign(pot->n_dofs, 0.0);
  const int nv = hyd->nodes_per_cell;
  for (int c = 0; c < mesh->n_cells(); ++c)
    for (int k = 0; k < nv; ++k) {
      const int dof = c * nv + k;
      const double w = hyd->lumped_mass[dof] * rho[dof];
      const Vec2 *g = &grad_basis[static_cast<std::size_t>(dof) * nv];
      for (int a = 0; a < nv; ++a)
        rhs[mesh->cells[c][a]] += w * dot(v[dof], g[a]);
    }
}

void PotentialOperators::vector_load(const std::vector<Vec2> &f, std::vector<double> &rhs) const {
  rhs.assign(pot->n_dofs, 0.0);
  const int nv = hyd->nodes_per_cell;
  for (int c = 0; c < mesh->n_cells(); ++c)
    for (int k = 0; k < nv; ++k) {
      const int dof = c * nv + k;
      const double w = hyd->lumped_mass[dof];
      const Vec2 *g = &grad_basis[static_cast<std::size_t>(dof) * nv];
      for (int a = 0; a < nv; ++a)
        rhs[mesh->cells[c][a]] += w * dot(f[dof], g[a]);
    }
}

void PotentialOperators::scalar_load(const std::vector<double> &f, std::vector<double> &rhs) const {
  // chi_a(x_k) = delta_{vertex(c,k), a}: the lumped product collapses to the
  // nodal weights.
  rhs.assign(pot->n_dofs, 0.0);
  const int nv = hyd->nodes_per_cell;
  for (int c = 0; c < mesh->n_cells(); ++c)
    for (int k = 0; k < nv; ++k) {
      const int dof = c * nv + k;
      rhs[mesh->cells[c][k]] += hyd->lumped_mass[dof] * f[dof];
    }
}

void PotentialOperators::gradient_at_nodes(const std::vector<double> &phi, std::vector<Vec2> &grad) const {
  const int nv = hyd->nodes_per_cell;
  grad.resize(hyd->n_dofs);
  const Mesh &m = *mesh;
  parallel_for(m.n_cells(), [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t c = b; c < e; ++c) {
      for (int k = 0; k < nv; ++k) {
        const std::size_t dof = static_cast<std::size_t>(c) * nv + k;
        const Vec2 *g = &grad_basis[dof * nv];
        Vec2 s{};
        for (int a = 0; a < nv; ++a)
          s += phi[m.cells[c][a]] * g[a];
        grad[dof] = s;
      }
    }
  });
}

double PotentialOperators::gradient_energy(const std::vector<double> &phi) const {
  const int nc = mesh->n_cells();
  return parallel_sum(nc, [&](std::int64_t b, std::int64_t e) {
    double s = 0.0;
    for (std::int64_t c = b; c < e; ++c)
      s += cell_gradient_energy(static_cast<int>(c), phi);
    return s;
  });
}

double PotentialOperators::cell_gradient_energy(int cell, const std::vector<double> &phi) const {
  const int nv = hyd->nodes_per_cell;
  const double *S = &cell_stiffness[static_cast<std::size_t>(cell) * nv * nv];
  const auto &cv = mesh->cells[cell];
  double s = 0.0;
  for (int a = 0; a < nv; ++a)
    for (int b = 0; b < nv; ++b)
      s += phi[cv[a]] * S[a * nv + b] * phi[cv[b]];
  return s;
}

}  // namespace ep
