#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "mbt/errors.hpp"

namespace mbt {

enum class PhiShape { PaperBump, Custom };

/// Capacity-drop profile phi(zeta): the speed factor seen by cars at signed
/// distance zeta from a bottleneck. phi(0) = v_under, phi = v_bar outside
/// [-beta, beta], strictly decreasing on (-beta, 0] and increasing on
/// [0, beta), with a continuous first derivative.
///
/// PaperBump is the closed form
///   phi(z) = v_bar - (v_bar - v_under) * exp(-z^2 / (beta - |z|)),  |z| < beta
/// (the exponent diverges to -inf as |z| -> beta, so phi joins the plateau
/// smoothly; at |z| >= beta the plateau branch applies). Custom carries
/// uniform samples of phi over [-beta, beta], evaluated by interpolation.
struct PhiProfile {
  double v_bar{1.0};
  double v_under{0.6};
  double beta{0.1};
  PhiShape shape{PhiShape::PaperBump};
  std::vector<double> samples{};  // Custom only

  static PhiProfile bump(double v_bar, double v_under, double beta) {
    PhiProfile p;
    p.v_bar = v_bar;
    p.v_under = v_under;
    p.beta = beta;
    p.shape = PhiShape::PaperBump;
    p.validate();
    return p;
  }

  static PhiProfile tabulated(double v_bar, double v_under, double beta, std::vector<double> samples) {
    PhiProfile p;
    p.v_bar = v_bar;
    p.v_under = v_under;
    p.beta = beta;
    p.shape = PhiShape::Custom;
    p.samples = std::move(samples);
    p.validate();
    return p;
  }

  bool flat() const { return v_under == v_bar; }

  void validate() const {
    if (!(v_under > 0.0)) throw ConfigError("phi: v_under must be positive");
    if (!(v_under <= v_bar)) throw ConfigError("phi: need v_under <= v_bar");
    if (!(beta > 0.0)) throw ConfigError("phi: beta must be positive");
    if (shape == PhiShape::Custom) {
      if (samples.size() < 3) throw ConfigError("phi: custom shape needs at least 3 samples");
      if (samples.size() % 2 == 0) throw ConfigError("phi: custom shape needs an odd sample count (center sample)");
      for (double s : samples)
        if (!(s >= v_under - 1e-12 && s <= v_bar + 1e-12))
          throw ConfigError("phi: custom samples must lie in [v_under, v_bar]");
      std::size_t mid = samples.size() / 2;
      if (std::abs(samples[mid] - v_under) > 1e-9 * v_bar)
        throw ConfigError("phi: custom center sample must equal v_under");
      for (std::size_t k = 0; k < mid; ++k)
        if (!(samples[k + 1] <= samples[k] + 1e-12))
          throw ConfigError("phi: custom samples must decrease toward the center");
      for (std::size_t k = mid; k + 1 < samples.size(); ++k)
        if (!(samples[k + 1] >= samples[k] - 1e-12))
          throw ConfigError("phi: custom samples must increase away from the center");
    }
  }
};

inline double phi_eval(const PhiProfile& p, double zeta) {
  double a = std::abs(zeta);
  if (a >= p.beta) return p.v_bar;
  if (p.shape == PhiShape::PaperBump) {
    return p.v_bar - (p.v_bar - p.v_under) * std::exp(-zeta * zeta / (p.beta - a));
  }
  // Custom: linear interpolation on the uniform table over [-beta, beta].
  double u = (zeta + p.beta) / (2.0 * p.beta) * static_cast<double>(p.samples.size() - 1);
  auto k = static_cast<std::size_t>(u);
  if (k + 1 >= p.samples.size()) return p.samples.back();
  double w = u - static_cast<double>(k);
  return p.samples[k] * (1.0 - w) + p.samples[k + 1] * w;
}

inline double phi_prime(const PhiProfile& p, double zeta) {
  double a = std::abs(zeta);
  if (a >= p.beta) return 0.0;
  if (p.shape == PhiShape::PaperBump) {
    if (zeta == 0.0) return 0.0;
    double d = p.beta - a;
    double amp = p.v_bar - p.v_under;
    double e = std::exp(-zeta * zeta / d);
    double r = a * (2.0 * p.beta - a) / (d * d);
    return (zeta > 0.0 ? 1.0 : -1.0) * amp * e * r;
  }
  double h = 1e-6 * p.beta;
  return (phi_eval(p, zeta + h) - phi_eval(p, zeta - h)) / (2.0 * h);
}

/// Second derivative of phi; closed form inside the bump support, finite
/// differences for Custom. Treated as 0 at |zeta| >= beta.
inline double phi_second(const PhiProfile& p, double zeta) {
  double a = std::abs(zeta);
  if (a >= p.beta) return 0.0;
  if (p.shape == PhiShape::PaperBump) {
    double d = p.beta - a;
    double amp = p.v_bar - p.v_under;
    double e = std::exp(-zeta * zeta / d);
    double r = a * (2.0 * p.beta - a) / (d * d);
    double rp = 2.0 * p.beta * p.beta / (d * d * d);
    return amp * e * (rp - r * r);
  }
  double h = 1e-5 * p.beta;
  return (phi_eval(p, zeta + h) - 2.0 * phi_eval(p, zeta) + phi_eval(p, zeta - h)) / (h * h);
}

/// sup |phi'|. Coarse scan plus golden-section refinement on (0, beta) for
/// the bump (phi' is odd, so one half suffices); dense sampling for Custom.
inline double phi_prime_sup(const PhiProfile& p) {
  if (p.flat()) return 0.0;
  auto mag = [&](double z) { return std::abs(phi_prime(p, z)); };
  int n = (p.shape == PhiShape::PaperBump) ? 256 : 4096;
  double best_z = 0.0, best = 0.0;
  for (int k = 1; k < n; ++k) {
    double z = p.beta * static_cast<double>(k) / static_cast<double>(n);
    double m = mag(z);
    if (m > best) {
      best = m;
      best_z = z;
    }
  }
  if (p.shape == PhiShape::Custom) return best;
  double lo = std::max(0.0, best_z - p.beta / n);
  double hi = std::min(p.beta, best_z + p.beta / n);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
  double fc = mag(c), fd = mag(d);
  while (hi - lo > 1e-13 * p.beta) {
    if (fc < fd) {
      lo = c;
      c = d;
      fc = fd;
      d = lo + gr * (hi - lo);
      fd = mag(d);
    } else {
      hi = d;
      d = c;
      fd = fc;
      c = hi - gr * (hi - lo);
      fc = mag(c);
    }
  }
  return std::max(best, std::max(fc, fd));
}

namespace detail {

struct QuadAccum {
  double value{0.0};
  double error{0.0};
};

template <class F>
inline void adaptive_simpson(const F& f, double a, double b, double fa, double fm, double fb, double whole,
                             double tol, double floor_width, int depth, QuadAccum& out) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || b - a <= floor_width || std::abs(delta) <= 15.0 * tol) {
    out.value += left + right + delta / 15.0;
    out.error += std::abs(delta) / 15.0;
    return;
  }
  adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, floor_width, depth - 1, out);
  adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, floor_width, depth - 1, out);
}

template <class F>
inline QuadAccum integrate_adaptive(const F& f, double a, double b, double tol, double floor_width) {
  QuadAccum acc;
  // Seed with a fixed split so narrow features near the ends are not missed.
  const int seed = 32;
  for (int k = 0; k < seed; ++k) {
    double x0 = a + (b - a) * static_cast<double>(k) / seed;
    double x1 = a + (b - a) * static_cast<double>(k + 1) / seed;
    double f0 = f(x0), fm = f(0.5 * (x0 + x1)), f1 = f(x1);
    double whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
    adaptive_simpson(f, x0, x1, f0, fm, f1, whole, tol / seed, floor_width, 48, acc);
  }
  return acc;
}

}  // namespace detail

struct KPhi {
  double value{0.0};
  double quadrature_error{0.0};
};

/// Total-variation growth rate constant: (1/4) * integral of |phi''| over the
/// bump support. Adaptive quadrature with an interval floor of 1e-10 * beta;
/// |phi''| is integrable here even though it is unbounded near |zeta| = beta.
inline KPhi k_phi_with_error(const PhiProfile& p, double tol = 1e-10) {
  if (p.flat()) return {0.0, 0.0};
  auto f = [&](double z) { return std::abs(phi_second(p, z)); };
  auto acc = detail::integrate_adaptive(f, 0.0, p.beta, tol, 1e-10 * p.beta);
  auto acc_neg = detail::integrate_adaptive(f, -p.beta, 0.0, tol, 1e-10 * p.beta);
  return {0.25 * (acc.value + acc_neg.value), 0.25 * (acc.error + acc_neg.error)};
}

inline double k_phi(const PhiProfile& p) { return k_phi_with_error(p).value; }

/// One slow vehicle: maximum speed plus its capacity-drop profile. The
/// overtaking condition v_under > w_max keeps cars faster than the vehicle.
struct BottleneckParams {
  double w_max{0.4};
  PhiProfile phi{};

  void validate() const {
    phi.validate();
    if (!(w_max > 0.0)) throw ConfigError("bottleneck: w_max must be positive");
    if (!(phi.v_under > w_max)) throw ConfigError("bottleneck: need v_under > w_max (cars overtake the vehicle)");
  }
};

struct RiemannPair {
  double rho_l{0.0};
  double rho_r{0.0};
};

namespace detail {
inline void require_density(double rho, const char* who) {
  if (!(rho >= 0.0 && rho <= 1.0))
    throw std::domain_error(std::string(who) + ": density " + std::to_string(rho) + " outside [0,1]");
}
}  // namespace detail

/// Car flux f(rho, zeta) = rho * (1 - rho) * phi(zeta).
inline double car_flux(double rho, double zeta, const PhiProfile& p) {
  detail::require_density(rho, "car_flux");
  return rho * (1.0 - rho) * phi_eval(p, zeta);
}

/// Bottleneck velocity w(rho) = w_max * (1 - rho).
inline double bottleneck_speed(double rho, double w_max) {
  detail::require_density(rho, "bottleneck_speed");
  return w_max * (1.0 - rho);
}

inline double bottleneck_speed(double rho, const BottleneckParams& b) { return bottleneck_speed(rho, b.w_max); }

/// Rankine-Hugoniot speed of the discontinuity (rho_l, rho_r) at distance
/// zeta from the bottleneck: phi(zeta) * (1 - rho_l - rho_r). Its sign does
/// not depend on zeta because phi > 0.
inline double rh_speed(const RiemannPair& pair, double zeta, const PhiProfile& p) {
  detail::require_density(pair.rho_l, "rh_speed");
  detail::require_density(pair.rho_r, "rh_speed");
  if (pair.rho_l == pair.rho_r) throw ConfigError("rh_speed: degenerate wave (equal states)");
  return phi_eval(p, zeta) * (1.0 - pair.rho_l - pair.rho_r);
}

/// Source term of the split formulation: -rho * (1 - rho) * phi'(zeta).
/// Vanishes off the bump support and at rho in {0, 1}.
inline double source_term(double rho, double zeta, const PhiProfile& p) {
  return -rho * (1.0 - rho) * phi_prime(p, zeta);
}

/// Threshold density above which the vehicle is strictly slower than every
/// neighboring wave, and the guaranteed speed margin mu at rho_min.
struct SpeedSeparation {
  double rho_min_threshold{0.0};
  double mu{0.0};
};

inline SpeedSeparation check_speed_separation(double rho_min, const BottleneckParams& b) {
  double thr = (b.phi.v_bar - b.w_max) / (2.0 * b.phi.v_bar - b.w_max);
  double mu = 0.5 * (2.0 * b.phi.v_under - b.w_max) * (rho_min - thr);
  return {thr, mu};
}

enum class HorizonKind { Bounded, Unbounded, Unverifiable };

struct TimeHorizon {
  HorizonKind kind{HorizonKind::Bounded};
  double eta{0.0};
  double t_max{0.0};  // valid when kind == Bounded
};

/// Largest horizon over which the speed-separation condition is guaranteed
/// to persist, given the supremum of the initial density. eta >= 1 means the
/// condition cannot be verified for this datum; a vanishing datum or a flat
/// profile poses no limit.
inline TimeHorizon time_horizon(double rho_bar_sup, const BottleneckParams& b) {
  detail::require_density(rho_bar_sup, "time_horizon");
  if (rho_bar_sup == 0.0) return {HorizonKind::Unbounded, 0.0, 0.0};
  double thr = (b.phi.v_bar - b.w_max) / (2.0 * b.phi.v_bar - b.w_max);
  double eta = thr / rho_bar_sup;
  if (eta >= 1.0) return {HorizonKind::Unverifiable, eta, 0.0};
  double sup = phi_prime_sup(b.phi);
  if (sup == 0.0) return {HorizonKind::Unbounded, eta, 0.0};
  return {HorizonKind::Bounded, eta, -std::log(eta) / sup};
}

/// Combined analytic validity summary for a datum with values in
/// [rho_min, rho_sup].
struct ValidityReport {
  double rho_min_threshold{0.0};
  double mu{0.0};
  double eta{0.0};
  HorizonKind horizon{HorizonKind::Bounded};
  double t_max{0.0};
};

inline ValidityReport validity_report(double rho_min, double rho_sup, const BottleneckParams& b) {
  auto sep = check_speed_separation(rho_min, b);
  auto hor = time_horizon(rho_sup, b);
  return {sep.rho_min_threshold, sep.mu, hor.eta, hor.kind, hor.t_max};
}

}  // namespace mbt
