#pragma once

#include <algorithm>
#include <cmath>

#include "mbt/model.hpp"

namespace mbt {

enum class WaveKind { Shock, Rarefaction, Constant };

/// Self-similar solution of the Riemann problem for the concave flux
/// phi * rho * (1 - rho) with the capacity factor frozen at phi. An up-jump
/// (rho_l < rho_r) is an entropic shock; a down-jump opens a rarefaction fan
/// whose edge speeds are f'(rho_l) < f'(rho_r), f'(rho) = phi * (1 - 2 rho).
struct RiemannSolution {
  WaveKind kind{WaveKind::Constant};
  RiemannPair states{};
  double phi{1.0};
  double shock_speed{0.0};          // Shock only
  double fan_lo{0.0}, fan_hi{0.0};  // Rarefaction only, ascending
};

inline RiemannSolution solve_riemann(const RiemannPair& pair, double phi_value) {
  detail::require_density(pair.rho_l, "solve_riemann");
  detail::require_density(pair.rho_r, "solve_riemann");
  if (!(phi_value > 0.0)) throw ConfigError("solve_riemann: phi must be positive");
  RiemannSolution sol;
  sol.states = pair;
  sol.phi = phi_value;
  if (pair.rho_l == pair.rho_r) {
    sol.kind = WaveKind::Constant;
  } else if (pair.rho_l < pair.rho_r) {
    sol.kind = WaveKind::Shock;
    sol.shock_speed = phi_value * (1.0 - pair.rho_l - pair.rho_r);
  } else {
    sol.kind = WaveKind::Rarefaction;
    sol.fan_lo = phi_value * (1.0 - 2.0 * pair.rho_l);
    sol.fan_hi = phi_value * (1.0 - 2.0 * pair.rho_r);
  }
  return sol;
}

/// Sample the solution on the ray x/t = xi. A ray exactly on a shock sees
/// the right state; inside a fan the value is (1 - xi/phi) / 2.
inline double eval_at_ray(const RiemannSolution& sol, double xi) {
  switch (sol.kind) {
    case WaveKind::Constant:
      return sol.states.rho_l;
    case WaveKind::Shock:
      return xi < sol.shock_speed ? sol.states.rho_l : sol.states.rho_r;
    case WaveKind::Rarefaction:
      if (xi <= sol.fan_lo) return sol.states.rho_l;
      if (xi >= sol.fan_hi) return sol.states.rho_r;
      return 0.5 * (1.0 - xi / sol.phi);
  }
  return sol.states.rho_r;  // unreachable
}

namespace detail {
// Demand/supply split of the normalized flux rho * (1 - rho).
inline double demand_bar(double rho) { return rho <= 0.5 ? rho * (1.0 - rho) : 0.25; }
inline double supply_bar(double rho) { return rho <= 0.5 ? 0.25 : rho * (1.0 - rho); }
}  // namespace detail

/// Godunov interface flux in demand-supply form:
///   phi * min(demand(rho_l), supply(rho_r)).
/// Equals phi * fbar(W(0)) with W the frozen-phi Riemann solution; the
/// demand-supply form is tie-free at transonic data.
inline double godunov_flux(const RiemannPair& pair, double phi_at_interface) {
  detail::require_density(pair.rho_l, "godunov_flux");
  detail::require_density(pair.rho_r, "godunov_flux");
  return phi_at_interface * std::min(detail::demand_bar(pair.rho_l), detail::supply_bar(pair.rho_r));
}

}  // namespace mbt
