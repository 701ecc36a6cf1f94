// fespace.hpp
// Finite element spaces on quad/triangle meshes: continuous nodal space for
// the potential, discontinuous nodal space per hydro component, lumped inner
// products, the c_ij divergence graph, and stiffness / density-weighted
// operators for the a+- bilinear forms.

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "core.hpp"
#include "mesh.hpp"

namespace ep {

// Continuous space: one dof per mesh vertex (C0), local-to-global map is the
// cell vertex tuple.
struct PotentialSpace {
  const Mesh *mesh = nullptr;
  int n_dofs = 0;
  std::vector<double> lumped_mass;          // m_j = int chi_j dx
  std::vector<std::uint8_t> on_boundary;    // any boundary tag
  double domain_area = 0.0;

  static PotentialSpace build(const Mesh &mesh);
};

// Discontinuous space: one dof per cell corner, duplicated across cells.
// dof = cell * nodes_per_cell + k.
struct HydroSpace {
  const Mesh *mesh = nullptr;
  int n_dofs = 0;
  int nodes_per_cell = 0;
  std::vector<Vec2> node_coords;
  std::vector<double> lumped_mass;          // m_i = w_{K,i} (each dof lives in one cell)
  double domain_area = 0.0;

  static HydroSpace build(const Mesh &mesh);

  int cell_of(int dof) const { return dof / nodes_per_cell; }
  int local_of(int dof) const { return dof % nodes_per_cell; }
};

double lumped_inner(const HydroSpace &space, const std::vector<double> &f, const std::vector<double> &g);
double lumped_inner(const HydroSpace &space, const std::function<double(Vec2)> &f,
                    const std::function<double(Vec2)> &g);

// Appendix-style per-node stencil with c_ij vectors.  CSR layout over the
// off-diagonal stencil; the diagonal closure c_ii (nonzero only in cells
// touching the domain boundary) is stored densely.
struct DivergenceGraph {
  int n_nodes = 0;
  std::vector<int> row_start;
  std::vector<int> col;
  std::vector<Vec2> cij;
  std::vector<Vec2> cji;                  // c_{ji} duplicated for row-local access
  std::vector<std::uint8_t> coincident;   // x_i == x_j (face-coincident pair)
  std::vector<int> transpose_index;       // CSR position of the (j,i) entry
  std::vector<Vec2> cii;
  std::vector<double> mass;               // m_i

  int degree(int i) const { return row_start[i + 1] - row_start[i]; }
};

// Assembles the divergence graph; periodic face identification is applied
// for every PeriodicPairs entry passed in.
DivergenceGraph assemble_divergence_graph(const Mesh &mesh, const HydroSpace &space,
                                          const std::vector<PeriodicPairs> &periodic = {});

// Compressed-row symmetric-pattern matrix on the potential space.
struct SparsePattern {
  int n = 0;
  std::vector<int> row_start;
  std::vector<int> col;

  int find(int i, int j) const;
};

struct SparseMatrix {
  const SparsePattern *pattern = nullptr;
  std::vector<double> vals;

  void mult(const std::vector<double> &x, std::vector<double> &y,
            const std::vector<std::uint8_t> *constrained = nullptr) const;
};

enum class APMMode { consistent, lumped };

// Stiffness and density-weighted operators of the potential space.
struct PotentialOperators {
  const Mesh *mesh = nullptr;
  const PotentialSpace *pot = nullptr;
  const HydroSpace *hyd = nullptr;

  SparsePattern pattern;
  SparseMatrix stiffness;                    // K_ij = (grad chi_i, grad chi_j)
  std::vector<double> cell_stiffness;        // local S_K, nv*nv per cell
  // Physical gradients of the potential basis at the cell interpolation
  // nodes: grad_basis[ (c*nv + k)*nv + a ].
  std::vector<Vec2> grad_basis;

  static PotentialOperators build(const Mesh &mesh, const PotentialSpace &pot, const HydroSpace &hyd);

  // a+- = K +- (dt^2 alpha / 4) * (rho grad chi, grad chi), consistent or
  // lumped density-weighted form.  Throws StepSizeError if the attractive
  // well-posedness bound 1 + (dt^2 alpha/4) max rho > 0 is violated.
  void assemble_a_pm(double dt, double alpha, const std::vector<double> &rho, APMMode mode,
                     SparseMatrix &a_plus, SparseMatrix &a_minus) const;

  // Lumped mixed vector rhs_i = <rho v, grad chi_i>.
  void momentum_load(const std::vector<double> &rho, const std::vector<Vec2> &v,
                     std::vector<double> &rhs) const;
  // Lumped vector rhs_i = <f, grad chi_i> for a nodal vector field f.
  void vector_load(const std::vector<Vec2> &f, std::vector<double> &rhs) const;
  // Lumped vector rhs_i = <f, chi_i> for a nodal scalar field f.
  void scalar_load(const std::vector<double> &f, std::vector<double> &rhs) const;

  // grad Phi evaluated per cell at the hydro nodes (duplicated nodes get
  // their own cell's gradient).
  void gradient_at_nodes(const std::vector<double> &phi, std::vector<Vec2> &grad) const;

  // |grad phi|^2 over the whole domain / one cell (consistent quadrature,
  // consistent with the assembled stiffness by construction).
  double gradient_energy(const std::vector<double> &phi) const;
  double cell_gradient_energy(int cell, const std::vector<double> &phi) const;
};

}  // namespace ep
