// euler.cpp

#include "euler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ep {

void require_admissible(const HydroState &u, int node) {
  if (!admissible(u)) {
    throw AdmissibilityError("inadmissible state at node " + std::to_string(node) +
                                 ": rho=" + std::to_string(u.rho) +
                                 " e=" + std::to_string(u.internal_energy()),
                             node, u.rho, u.internal_energy());
  }
}

double pressure(const HydroState &u, const GasLaw &gas) {
  require_admissible(u);
  return (gas.gamma - 1.0) * u.internal_energy();
}

double sound_speed(const HydroState &u, const GasLaw &gas) {
  return std::sqrt(gas.gamma * pressure(u, gas) / u.rho);
}

double specific_entropy(const HydroState &u, const GasLaw &gas) {
  require_admissible(u);
  const double eps = u.specific_internal_energy();
  return std::log(eps) / (gas.gamma - 1.0) - std::log(u.rho);
}

FluxMatrix flux(const HydroState &u, const GasLaw &gas) {
  const double p = pressure(u, gas);
  const Vec2 v{u.m.x / u.rho, u.m.y / u.rho};
  FluxMatrix f;
  f[0] = u.m;
  f[1] = Vec2{v.x * u.m.x + p, v.y * u.m.x};
  f[2] = Vec2{v.x * u.m.y, v.y * u.m.y + p};
  f[3] = Vec2{v.x * (u.E + p), v.y * (u.E + p)};
  return f;
}

namespace {

struct Projected {
  double rho, u, p, c;
};

Projected project(const HydroState &s, const Vec2 &n, const GasLaw &gas) {
  Projected q;
  q.rho = s.rho;
  q.u = dot(s.m, n) / s.rho;
  q.p = pressure(s, gas);
  q.c = std::sqrt(gas.gamma * q.p / q.rho);
  return q;
}

// Pressure function branch of one side, f_K(p), shock branch for p > p_K and
// rarefaction branch otherwise.
double pressure_fn(const Projected &q, double p, double gamma) {
  if (p > q.p) {
    const double A = 2.0 / ((gamma + 1.0) * q.rho);
    const double B = (gamma - 1.0) / (gamma + 1.0) * q.p;
    return (p - q.p) * std::sqrt(A / (p + B));
  }
  return 2.0 * q.c / (gamma - 1.0) * (std::pow(p / q.p, (gamma - 1.0) / (2.0 * gamma)) - 1.0);
}

}  // namespace

// Two-wave estimate: with any p_hat >= p*, the speeds
//   lambda- = uL - cL sqrt(1 + (g+1)/(2g) ((p_hat-pL)/pL)_+)
//   lambda+ = uR + cR sqrt(1 + (g+1)/(2g) ((p_hat-pR)/pR)_+)
// bracket the Riemann fan.  p_hat = max(pL,pR) works whenever the exact
// pressure function is nonnegative there (cheap test, no transcendentals in
// the shock branch); otherwise both extreme waves are shocks and the
// two-rarefaction root bounds p* from above, since the rarefaction branch of
// the pressure function lies below the shock branch for p > p_K.
double max_wavespeed(const HydroState &uL, const HydroState &uR, const Vec2 &n, const GasLaw &gas) {
  const double g = gas.gamma;
  const Projected L = project(uL, n, gas);
  const Projected R = project(uR, n, gas);
  const double du = R.u - L.u;

  double p_hat;
  const double p_max = std::max(L.p, R.p);
  const Projected &lo = (L.p <= R.p) ? L : R;
  // phi(p_max) = f_lo(p_max) + du; the high side contributes zero.
  const double A_lo = 2.0 / ((g + 1.0) * lo.rho);
  const double B_lo = (g - 1.0) / (g + 1.0) * lo.p;
  const double phi_pmax = (p_max - lo.p) * std::sqrt(A_lo / (p_max + B_lo)) + du;
  if (phi_pmax >= 0.0) {
    p_hat = p_max;
  } else {
    // Two-rarefaction root.
    const double xi = (g - 1.0) / (2.0 * g);
    const double num = L.c + R.c - 0.5 * (g - 1.0) * du;
    const double den = L.c / std::pow(L.p, xi) + R.c / std::pow(R.p, xi);
    p_hat = std::pow(std::max(num, 0.0) / den, 1.0 / xi);
    p_hat = std::max(p_hat, p_max);
  }

  const double k = 0.5 * (g + 1.0) / g;
  const double qL = std::sqrt(1.0 + k * std::max((p_hat - L.p) / L.p, 0.0));
  const double qR = std::sqrt(1.0 + k * std::max((p_hat - R.p) / R.p, 0.0));
  const double lam_minus = L.u - L.c * qL;
  const double lam_plus = R.u + R.c * qR;
  return std::max({-lam_minus, lam_plus, 0.0});
}

}  // namespace ep
