// euler.hpp
// Hydrodynamic state algebra for the compressible Euler system with ideal
// gas closure: conserved/primitive conversions, flux, specific entropy,
// admissibility, and a guaranteed upper bound on the maximal wavespeed of
// the projected Riemann problem.

#pragma once

#include <array>

#include "core.hpp"

namespace ep {

struct GasLaw {
  double gamma = 5.0 / 3.0;
};

struct HydroState {
  double rho = 0.0;
  Vec2 m{};
  double E = 0.0;

  double internal_energy() const { return E - 0.5 * dot(m, m) / rho; }
  double specific_internal_energy() const { return internal_energy() / rho; }

  HydroState &operator+=(const HydroState &o) {
    rho += o.rho;
    m += o.m;
    E += o.E;
    return *this;
  }
  HydroState &operator*=(double s) {
    rho *= s;
    m *= s;
    E *= s;
    return *this;
  }
};

inline HydroState operator+(HydroState a, const HydroState &b) { return a += b; }
inline HydroState operator*(double s, HydroState a) { return a *= s; }

// Absolute floors used by admissibility checks; violations are errors in the
// core, never clamps.
constexpr double rho_floor = 1e-14;
constexpr double e_floor = 1e-14;

inline bool admissible(const HydroState &u, double rho_ref = 1.0, double e_ref = 1.0) {
  return u.rho >= rho_floor * rho_ref && u.internal_energy() >= e_floor * e_ref;
}

// Throws AdmissibilityError (carrying node data) if u lies outside the
// invariant set.
void require_admissible(const HydroState &u, int node = -1);

double pressure(const HydroState &u, const GasLaw &gas);
double sound_speed(const HydroState &u, const GasLaw &gas);

// Specific entropy s(rho, eps) = ln(eps^{1/(gamma-1)} / rho) with eps the
// specific internal energy.
double specific_entropy(const HydroState &u, const GasLaw &gas);

// Euler flux, rows ordered (mass, momentum_x, momentum_y, energy), one
// column per space direction.
using FluxMatrix = std::array<Vec2, 4>;
FluxMatrix flux(const HydroState &u, const GasLaw &gas);

// Guaranteed upper bound on the maximal wavespeed of the 1d Riemann problem
// for states uL, uR projected onto the unit vector n.
double max_wavespeed(const HydroState &uL, const HydroState &uR, const Vec2 &n, const GasLaw &gas);

}  // namespace ep
