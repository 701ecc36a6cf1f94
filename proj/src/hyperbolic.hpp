// hyperbolic.hpp
// Graph-based hyperbolic solver: low-order invariant-domain-preserving
// update, face-coincidence high-order update, convex limiting, hyperbolic
// CFL, SSP-RK stepping, and nodal boundary conditions.

#pragma once

#include <functional>
#include <vector>

#include "core.hpp"
#include "euler.hpp"
#include "fespace.hpp"

namespace ep {

// Conserved nodal fields in structure-of-arrays layout.
struct HydroField {
  std::vector<double> rho, mx, my, E;

  int size() const { return static_cast<int>(rho.size()); }
  void resize(int n) {
    rho.resize(n);
    mx.resize(n);
    my.resize(n);
    E.resize(n);
  }
  HydroState get(int i) const { return HydroState{rho[i], Vec2{mx[i], my[i]}, E[i]}; }
  void set(int i, const HydroState &u) {
    rho[i] = u.rho;
    mx[i] = u.m.x;
    my[i] = u.m.y;
    E[i] = u.E;
  }
};

// Symmetric graph viscosities, aligned with the DivergenceGraph CSR.  The
// high-order viscosity is implied: d^H = d^L on face-coincident pairs
// (x_i = x_j) and zero elsewhere.
struct ViscosityField {
  std::vector<double> d;         // d_ij^L per CSR entry
  std::vector<double> d_diag;    // d_ii^L = -sum_j d_ij^L

  double high_order(const DivergenceGraph &g, int p) const { return g.coincident[p] ? d[p] : 0.0; }
};

struct LimiterMatrix {
  std::vector<double> l;  // per CSR entry, symmetric
};

ViscosityField compute_low_viscosities(const HydroField &U, const DivergenceGraph &graph, const GasLaw &gas);

// dt = c_cfl * min_i m_i / (2 sum_j d_ij); falls back to dt_max if all
// viscosities vanish.
double cfl_dt(const ViscosityField &visc, const DivergenceGraph &graph, double c_cfl, double dt_max);

HydroField low_order_step(const HydroField &U, const DivergenceGraph &graph, const ViscosityField &visc,
                          const GasLaw &gas, double dt);
HydroField high_order_step(const HydroField &U, const DivergenceGraph &graph, const ViscosityField &visc,
                           const GasLaw &gas, double dt);

// Blends U_low with the antidiffusive fluxes A_ij = dt (d^H - d^L)(U_j - U_i)
// so that the result stays in the invariant set with local bounds drawn from
// the time-n stencil.  l = 1 wherever the unlimited update is admissible.
struct LimiterStats {
  std::int64_t limited_edges = 0;
  std::int64_t total_edges = 0;
};

HydroField convex_limit(const HydroField &U_low, const HydroField &U, const DivergenceGraph &graph,
                        const ViscosityField &visc, const GasLaw &gas, double dt, LimiterMatrix &limiter,
                        LimiterStats *stats = nullptr);

enum class HydroBcMode { none, periodic, slip, dirichlet };

struct HydroBoundary {
  HydroBcMode mode = HydroBcMode::none;
  std::vector<int> nodes;
  std::vector<Vec2> normal;              // unit outward normal (slip)
  std::vector<std::uint8_t> corner;      // wall corner: both components removed
  std::function<HydroState(Vec2, double)> exact;  // dirichlet state
  std::vector<Vec2> coords;              // node coordinates (dirichlet)

  static HydroBoundary build(const Mesh &mesh, const HydroSpace &space, HydroBcMode mode,
                             std::function<HydroState(Vec2, double)> exact = {});
};

void apply_hydro_bc(HydroField &U, const HydroBoundary &bc, double t);

// One SSP-RK step of `stages` forward-Euler substeps (Shu-Osher SSPRK(3,3)
// for stages == 3); boundary conditions are applied after every stage at the
// stage time.  Throws CflError if dt violates the low-order bound of any
// substep.
HydroField ssp_rk_step(const HydroField &U, const DivergenceGraph &graph, const GasLaw &gas,
                       const HydroBoundary &bc, double t, double dt, int stages, LimiterStats *stats = nullptr,
                       const ViscosityField *visc0 = nullptr);

// Algorithm-1 style driver: pick dt from the CFL (unless forced_dt > 0) and
// advance one SSP-RK step.
struct HyperbolicResult {
  HydroField U;
  double dt = 0.0;
  LimiterStats limiter;
};

HyperbolicResult hyperbolic_update(const HydroField &U, const DivergenceGraph &graph, const GasLaw &gas,
                                   const HydroBoundary &bc, double t, double c_cfl, double dt_max,
                                   double forced_dt = -1.0, int stages = 3);

}  // namespace ep
