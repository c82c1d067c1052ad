#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "mbt/model.hpp"
#include "mbt/record.hpp"
#include "mbt/riemann.hpp"
#include "mbt/scenario.hpp"

namespace mbt {

enum class FrontKind : unsigned char { Shock, RarefactionShock, SourceGenerated };

struct Front {
  double pos{0.0};
  double left{0.0};
  double right{0.0};
  FrontKind kind{FrontKind::Shock};
};

/// Piecewise-constant profile as an ordered list of jumps. Interval i
/// (between fronts i-1 and i) carries value val[i]; val has one more entry
/// than pos, so neighboring fronts always chain exactly. Ties in pos occur
/// transiently when a rarefaction fan is created and separate immediately.
struct FrontList {
  std::vector<double> pos;
  std::vector<double> val{0.0};
  std::vector<FrontKind> kind;

  std::size_t size() const { return pos.size(); }
  double left_state() const { return val.front(); }
  Front front(std::size_t k) const { return {pos[k], val[k], val[k + 1], kind[k]}; }

  static FrontList from_fronts(double left_state, const std::vector<Front>& fronts) {
    FrontList fl;
    fl.val = {left_state};
    for (const auto& f : fronts) {
      if (!fl.pos.empty() && f.pos < fl.pos.back()) throw ConfigError("front list: positions must be ordered");
      if (f.left != fl.val.back()) throw ConfigError("front list: states must chain");
      fl.pos.push_back(f.pos);
      fl.val.push_back(f.right);
      fl.kind.push_back(f.kind);
    }
    return fl;
  }

  /// Index of the interval containing x; a front exactly at x counts as
  /// lying to the left of x.
  std::size_t interval_index(double x) const {
    return static_cast<std::size_t>(std::upper_bound(pos.begin(), pos.end(), x) - pos.begin());
  }

  enum class Side { Left, Right };
  double value_at(double x, Side side = Side::Right) const {
    auto it = side == Side::Right ? std::upper_bound(pos.begin(), pos.end(), x)
                                  : std::lower_bound(pos.begin(), pos.end(), x);
    return val[static_cast<std::size_t>(it - pos.begin())];
  }

  double total_variation() const {
    double tv = 0.0;
    for (std::size_t k = 0; k + 1 < val.size(); ++k) tv += std::abs(val[k + 1] - val[k]);
    return tv;
  }

  double min_value_in(double a, double b) const {
    std::size_t i0 = interval_index(a), i1 = interval_index(b);
    double m = val[i0];
    for (std::size_t i = i0; i <= i1 && i < val.size(); ++i) m = std::min(m, val[i]);
    return m;
  }

  void erase_front(std::size_t k) {
    pos.erase(pos.begin() + static_cast<std::ptrdiff_t>(k));
    val.erase(val.begin() + static_cast<std::ptrdiff_t>(k) + 1);
    kind.erase(kind.begin() + static_cast<std::ptrdiff_t>(k));
  }

  /// Drop fronts with |jump| <= eps (the lost jump is absorbed so the chain
  /// stays exact).
  void prune(double eps) {
    for (std::size_t k = size(); k-- > 0;) {
      if (std::abs(val[k + 1] - val[k]) <= eps) erase_front(k);
    }
  }

  /// Exact cell averages on a uniform probe grid; the profile extends
  /// constantly beyond its first and last front.
  std::vector<double> cell_averages(double x0, double dx, std::size_t n) const {
    std::vector<double> out(n);
    for (std::size_t m = 0; m < n; ++m) {
      double a = x0 + static_cast<double>(m) * dx;
      double b = a + dx;
      std::size_t i = interval_index(a);
      double acc = 0.0, lo = a;
      while (i < pos.size() && pos[i] < b) {
        acc += val[i] * (std::max(pos[i], lo) - lo);
        lo = std::max(pos[i], lo);
        ++i;
      }
      acc += val[i] * (b - lo);
      out[m] = acc / (b - a);
    }
    return out;
  }
};

/// Discretization knobs for the front-tracking run. delta_nu caps the
/// strength of a single rarefaction shock; event_tol is the time tolerance
/// for interaction detection.
struct WftParams {
  int nu{6};
  double dt{0.01};
  double delta_nu{0.0};
  double event_tol{0.0};
  // Jumps below this strength are not kept as sharp discontinuities by the
  // re-sampling step; they are re-discretized onto the fresh lattice.
  // Without a floor the partition refines geometrically (every window adds
  // lattice points and midpoints around all previous ones), while jumps far
  // below delta_nu are beneath the scheme's own wave resolution anyway.
  double keep_threshold{0.0};
  int substeps{8};
  long max_events_per_window{1000000};

  static WftParams for_level(int nu, double dt) {
    WftParams w;
    w.nu = nu;
    w.dt = dt;
    w.delta_nu = std::min(std::pow(2.0, -nu), 1.0 / (nu + 1.0));
    w.event_tol = 1e-10 * std::max(dt, 1.0);
    w.keep_threshold = w.delta_nu / 4.0;
    return w;
  }

  void validate() const {
    if (nu < 1) throw ConfigError("wft: nu must be >= 1");
    if (!(dt > 0.0)) throw ConfigError("wft: dt must be positive");
    if (!(delta_nu > 0.0 && delta_nu < 1.0 / nu)) throw ConfigError("wft: need 0 < delta_nu < 1/nu");
    if (!(event_tol > 0.0)) throw ConfigError("wft: event_tol must be positive");
  }
};

/// Dyadic sampling of the initial datum: value rho(j 2^-nu) on
/// [j 2^-nu, (j+1) 2^-nu] within [-nu, nu] (intersected with the domain),
/// constant extension outside. Sampling never increases total variation.
inline FrontList sample_initial(const std::function<double(double)>& rho_bar, int nu, double x_lo, double x_hi) {
  double h = std::pow(2.0, -nu);
  double w_lo = std::max(x_lo, -static_cast<double>(nu));
  double w_hi = std::min(x_hi, static_cast<double>(nu));
  FrontList fl;
  if (w_lo >= w_hi) {
    fl.val = {rho_bar(std::clamp(0.5 * (x_lo + x_hi), w_lo, w_hi))};
    return fl;
  }
  long j0 = static_cast<long>(std::ceil(w_lo / h - 1e-9));
  long j1 = static_cast<long>(std::floor(w_hi / h + 1e-9));
  double v_prev = rho_bar(static_cast<double>(j0) * h);
  detail::require_density(v_prev, "sample_initial");
  fl.val = {v_prev};
  for (long j = j0 + 1; j <= j1; ++j) {
    double x = static_cast<double>(j) * h;
    double v = rho_bar(x);
    detail::require_density(v, "sample_initial");
    if (v != v_prev) {
      fl.pos.push_back(x);
      fl.val.push_back(v);
      fl.kind.push_back(v_prev < v ? FrontKind::Shock : FrontKind::RarefactionShock);
      v_prev = v;
    }
  }
  return fl;
}

/// Entropic resolution of one jump: an up-jump is a single shock; a
/// down-jump becomes ceil(strength / delta_nu) equal rarefaction shocks.
inline std::vector<Front> fan_riemann(const RiemannPair& pair, double delta_nu, double at_pos = 0.0) {
  detail::require_density(pair.rho_l, "fan_riemann");
  detail::require_density(pair.rho_r, "fan_riemann");
  std::vector<Front> out;
  if (pair.rho_l == pair.rho_r) return out;
  if (pair.rho_l < pair.rho_r) {
    out.push_back({at_pos, pair.rho_l, pair.rho_r, FrontKind::Shock});
    return out;
  }
  double drop = pair.rho_l - pair.rho_r;
  int slices = static_cast<int>(std::ceil(drop / delta_nu - 1e-12));
  for (int i = 0; i < slices; ++i) {
    double a = pair.rho_l + (pair.rho_r - pair.rho_l) * static_cast<double>(i) / slices;
    double b = (i + 1 == slices) ? pair.rho_r
                                 : pair.rho_l + (pair.rho_r - pair.rho_l) * static_cast<double>(i + 1) / slices;
    out.push_back({at_pos, a, b, FrontKind::RarefactionShock});
  }
  return out;
}

/// Re-resolve every jump entropically (start of each splitting window).
inline FrontList resolve_entropic(const FrontList& in, double delta_nu) {
  FrontList out;
  out.val = {in.val[0]};
  for (std::size_t k = 0; k < in.size(); ++k) {
    for (const auto& f : fan_riemann({in.val[k], in.val[k + 1]}, delta_nu, in.pos[k])) {
      out.pos.push_back(f.pos);
      out.val.push_back(f.right);
      out.kind.push_back(f.kind);
    }
  }
  return out;
}

/// Lazy pointwise view of the Euler source update
///   rho_source(x) = rho(x) + dt * (-rho (1-rho) phi'(x - y_bar))
/// applied to a piecewise-constant base profile. Values change only within
/// [y_bar - beta, y_bar + beta]; the base jumps stay where they are.
struct SourceProfile {
  FrontList base;
  double y_bar{0.0};
  double dt{0.0};
  PhiProfile phi{};

  double value(double x, FrontList::Side side) const {
    double v = base.value_at(x, side);
    double updated = v + dt * source_term(v, x - y_bar, phi);
    if (!(updated >= 0.0 && updated <= 1.0))
      throw SolverError("source step left [0,1]; dt too large for this profile");
    return updated;
  }
};

inline SourceProfile apply_source(const FrontList& fronts, double y_bar, double dt, const PhiProfile& phi) {
  return SourceProfile{fronts, y_bar, dt, phi};
}

/// Structured re-sampling of the source-updated profile on
/// [y_bar - beta, y_bar + beta]: insert the 2^nu lattice points (and a
/// midpoint wherever two neighboring marks trap no lattice point), then
/// sample each subinterval from the side of its nearest retained jump so
/// every retained discontinuity keeps both one-sided limits exactly.
/// New jumps are tagged SourceGenerated. Jumps weaker than keep_threshold
/// are not retained as partition marks; their mass is re-sampled onto the
/// lattice like the smooth part of the profile.
inline FrontList resample_near_bottleneck(const SourceProfile& sp, double y_bar, int nu, double pos_tol = 1e-12,
                                          double keep_threshold = 0.0) {
  const double beta = sp.phi.beta;
  const double lo = y_bar - beta, hi = y_bar + beta;
  const FrontList& base = sp.base;

  FrontList out;
  out.val = {base.val[0]};
  std::size_t k = 0;
  // Fronts left of the influence zone are untouched.
  while (k < base.size() && base.pos[k] <= lo) {
    out.pos.push_back(base.pos[k]);
    out.val.push_back(base.val[k + 1]);
    out.kind.push_back(base.kind[k]);
    ++k;
  }
  std::vector<double> disc;
  std::vector<FrontKind> disc_kind;
  while (k < base.size() && base.pos[k] < hi) {
    if (std::abs(base.val[k + 1] - base.val[k]) >= keep_threshold) {
      disc.push_back(base.pos[k]);
      disc_kind.push_back(base.kind[k]);
    }
    ++k;
  }

  // Lattice points, skipping any that collide with a retained jump.
  std::vector<double> pts;
  double spacing = 2.0 * beta / std::pow(2.0, nu);
  for (long j = 1; j <= static_cast<long>(std::pow(2.0, nu)); ++j) {
    double x = lo + static_cast<double>(j) * spacing;
    bool clash = false;
    for (double d : disc)
      if (std::abs(d - x) <= pos_tol) clash = true;
    if (!clash) pts.push_back(std::min(x, hi));
  }
  // Midpoints between consecutive marks (zone edges and jumps) that trap no
  // lattice point, so both sides of every jump get sampled.
  {
    std::vector<double> marks;
    marks.push_back(lo);
    marks.insert(marks.end(), disc.begin(), disc.end());
    marks.push_back(hi);
    for (std::size_t i = 0; i + 1 < marks.size(); ++i) {
      bool has = false;
      for (double x : pts)
        if (x > marks[i] + pos_tol && x < marks[i + 1] - pos_tol) has = true;
      if (!has && marks[i + 1] - marks[i] > 4.0 * pos_tol) pts.push_back(0.5 * (marks[i] + marks[i + 1]));
    }
  }
  // Partition of [lo, hi].
  std::vector<double> part;
  part.reserve(pts.size() + disc.size() + 2);
  part.push_back(lo);
  part.insert(part.end(), pts.begin(), pts.end());
  part.insert(part.end(), disc.begin(), disc.end());
  part.push_back(hi);
  std::sort(part.begin(), part.end());
  part.erase(std::unique(part.begin(), part.end(), [&](double a, double b) { return b - a <= pos_tol; }),
             part.end());

  auto is_disc = [&](double x, FrontKind& kind_out) {
    auto it = std::lower_bound(disc.begin(), disc.end(), x - pos_tol);
    if (it != disc.end() && std::abs(*it - x) <= pos_tol) {
      kind_out = disc_kind[static_cast<std::size_t>(it - disc.begin())];
      return true;
    }
    return false;
  };

  double v_cur = out.val.back();  // value entering the zone from the left
  for (std::size_t i = 0; i + 1 < part.size(); ++i) {
    double a = part[i], b = part[i + 1];
    FrontKind ka{}, kb{};
    bool a_disc = is_disc(a, ka);
    bool b_disc = is_disc(b, kb);
    double v_int = a_disc ? sp.value(a, FrontList::Side::Right)
                          : (b_disc ? sp.value(b, FrontList::Side::Left) : sp.value(a, FrontList::Side::Right));
    if (v_int != v_cur) {
      out.pos.push_back(a);
      out.val.push_back(v_int);
      out.kind.push_back(a_disc ? ka : FrontKind::SourceGenerated);
      v_cur = v_int;
    }
  }
  // Rejoin the untouched profile to the right of the zone (k now indexes the
  // first front at or beyond the zone's right edge).
  double v_right = base.val[k];
  if (v_right != v_cur) {
    out.pos.push_back(hi);
    out.val.push_back(v_right);
    out.kind.push_back(FrontKind::SourceGenerated);
    v_cur = v_right;
  }
  while (k < base.size()) {
    out.pos.push_back(base.pos[k]);
    out.val.push_back(base.val[k + 1]);
    out.kind.push_back(base.kind[k]);
    ++k;
  }
  return out;
}

struct EvolveStats {
  long events{0};
  std::vector<WftEvent>* log{nullptr};
};

namespace detail {

struct WftOde {
  const PhiProfile* phi;
  double y_speed;  // constant between events

  // One classic RK4 step of all front positions plus the vehicle.
  void rk4(const std::vector<double>& val, std::vector<double>& p, double& y, double h,
           std::vector<double>& k1, std::vector<double>& k2, std::vector<double>& k3) const {
    std::size_t n = p.size();
    k1.resize(n);
    k2.resize(n);
    k3.resize(n);
    auto speed = [&](double x, double yy, std::size_t k) {
      return phi_eval(*phi, x - yy) * (1.0 - val[k] - val[k + 1]);
    };
    double y1 = y, y2 = y + 0.5 * h * y_speed, y4 = y + h * y_speed;
    for (std::size_t k = 0; k < n; ++k) k1[k] = speed(p[k], y1, k);
    for (std::size_t k = 0; k < n; ++k) k2[k] = speed(p[k] + 0.5 * h * k1[k], y2, k);
    for (std::size_t k = 0; k < n; ++k) k3[k] = speed(p[k] + 0.5 * h * k2[k], y2, k);
    for (std::size_t k = 0; k < n; ++k) {
      double k4 = speed(p[k] + h * k3[k], y4, k);
      p[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4);
    }
    y = y4;
  }

  // Same step for a single front, used while bisecting interaction times.
  double rk4_one(double x, double l, double r, double y, double h) const {
    auto f = [&](double xx, double yy) { return phi_eval(*phi, xx - yy) * (1.0 - l - r); };
    double a1 = f(x, y);
    double a2 = f(x + 0.5 * h * a1, y + 0.5 * h * y_speed);
    double a3 = f(x + 0.5 * h * a2, y + 0.5 * h * y_speed);
    double a4 = f(x + h * a3, y + h * y_speed);
    return x + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
  }
};

}  // namespace detail

/// Evolve fronts and the vehicle over one splitting window [t0, t0 + dt_w].
/// Front speeds follow the Rankine-Hugoniot relation with the capacity
/// factor read at the current distance to the vehicle; the vehicle reads the
/// density of the interval it sits in. Interactions (front merges, the
/// vehicle crossing a front, a front overtaking the vehicle) are located by
/// bisection to event_tol and resolved in chronological order.
inline void evolve_window(FrontList& fl, double& y, const BottleneckParams& bp, const WftParams& wp,
                          double dt_w, double t0, EvolveStats& stats) {
  const PhiProfile& phi = bp.phi;
  std::vector<double> k1, k2, k3, trial;
  double t_loc = 0.0;
  std::size_t idx = fl.interval_index(y);
  long events_this_window = 0;

  auto zone_min = [&]() { return fl.min_value_in(y - phi.beta, y + phi.beta); };
  auto log_event = [&](const char* kind, double pos, double strength, double fs, double vb, double va) {
    if (stats.log) stats.log->push_back({t0 + t_loc, kind, pos, strength, fs, vb, va, zone_min()});
  };

  while (dt_w - t_loc > std::min(wp.event_tol, 1e-9 * dt_w)) {
    double h = std::min(dt_w / wp.substeps, dt_w - t_loc);
    detail::WftOde ode{&phi, bottleneck_speed(fl.val[idx], bp)};

    trial = fl.pos;
    double y_trial = y;
    ode.rk4(fl.val, trial, y_trial, h, k1, k2, k3);

    // Interaction candidates: a front pair crossing, the vehicle reaching
    // its right neighbor, or its left neighbor catching the vehicle.
    struct Cand {
      int type;  // 0 merge(k,k+1), 1 cross right (front idx), 2 overtaken (front idx-1)
      std::size_t k;
      double theta;
    };
    std::vector<Cand> cands;
    for (std::size_t k = 0; k + 1 < trial.size(); ++k) {
      double g_old = fl.pos[k + 1] - fl.pos[k];
      double g_new = trial[k + 1] - trial[k];
      if (g_new < 0.0 || (g_new == 0.0 && g_old > 0.0)) cands.push_back({0, k, h});
    }
    if (idx < trial.size() && trial[idx] - y_trial <= 0.0 && fl.pos[idx] - y > 0.0)
      cands.push_back({1, idx, h});
    if (idx > 0 && y_trial - trial[idx - 1] <= 0.0 && y - fl.pos[idx - 1] > 0.0)
      cands.push_back({2, idx - 1, h});

    if (cands.empty()) {
      fl.pos.swap(trial);
      y = y_trial;
      t_loc += h;
      continue;
    }

    // Bisect each candidate's gap to event_tol; fronts depend only on their
    // own position and the vehicle, so pairs integrate standalone.
    for (auto& c : cands) {
      auto gap_at = [&](double th) -> double {
        if (th == 0.0) {
          if (c.type == 0) return fl.pos[c.k + 1] - fl.pos[c.k];
          if (c.type == 1) return fl.pos[c.k] - y;
          return y - fl.pos[c.k];
        }
        double yy = y + th * ode.y_speed;
        if (c.type == 0) {
          double a = ode.rk4_one(fl.pos[c.k], fl.val[c.k], fl.val[c.k + 1], y, th);
          double b = ode.rk4_one(fl.pos[c.k + 1], fl.val[c.k + 1], fl.val[c.k + 2], y, th);
          return b - a;
        }
        double f = ode.rk4_one(fl.pos[c.k], fl.val[c.k], fl.val[c.k + 1], y, th);
        return c.type == 1 ? f - yy : yy - f;
      };
      double lo = 0.0, hi = c.theta;
      if (gap_at(0.0) <= 0.0) {
        c.theta = 0.0;
        continue;
      }
      for (int it = 0; it < 60 && hi - lo > wp.event_tol; ++it) {
        double mid = 0.5 * (lo + hi);
        (gap_at(mid) > 0.0 ? lo : hi) = mid;
      }
      c.theta = lo;
    }
    auto first = std::min_element(cands.begin(), cands.end(),
                                  [](const Cand& a, const Cand& b) { return a.theta < b.theta; });
    double theta = first->theta;
    if (theta > 0.0) {
      trial = fl.pos;
      double yt = y;
      ode.rk4(fl.val, trial, yt, theta, k1, k2, k3);
      fl.pos.swap(trial);
      y = yt;
      t_loc += theta;
    }

    if (++events_this_window > wp.max_events_per_window)
      throw SolverError("front interaction count exceeded the per-window limit", t0 + t_loc);
    ++stats.events;

    if (first->type == 0) {
      // Merge the colliding pair plus anything within event_tol of the
      // collision point (simultaneous interactions resolve left to right).
      std::size_t k = first->k;
      double p = 0.5 * (fl.pos[k] + fl.pos[k + 1]);
      std::size_t k_lo = k, k_hi = k + 1;
      while (k_lo > 0 && std::abs(fl.pos[k_lo - 1] - p) <= 2.0 * wp.event_tol) --k_lo;
      while (k_hi + 1 < fl.size() && std::abs(fl.pos[k_hi + 1] - p) <= 2.0 * wp.event_tol) ++k_hi;
      double l = fl.val[k_lo], r = fl.val[k_hi + 1];
      if (std::abs(p - y) <= wp.event_tol) p = (p >= y) ? y + 2.0 * wp.event_tol : y - 2.0 * wp.event_tol;
      double speed_before = phi_eval(phi, fl.pos[k] - y) * (1.0 - fl.val[k] - fl.val[k + 1]);
      for (std::size_t j = k_hi + 1; j-- > k_lo;) fl.erase_front(j);
      auto fan = fan_riemann({l, r}, wp.delta_nu, p);
      for (std::size_t j = 0; j < fan.size(); ++j) {
        fl.pos.insert(fl.pos.begin() + static_cast<std::ptrdiff_t>(k_lo + j), fan[j].pos);
        fl.val.insert(fl.val.begin() + static_cast<std::ptrdiff_t>(k_lo + j) + 1, fan[j].right);
        fl.kind.insert(fl.kind.begin() + static_cast<std::ptrdiff_t>(k_lo + j), fan[j].kind);
      }
      idx = fl.interval_index(y);
      log_event("merge", p, std::abs(r - l), speed_before, ode.y_speed,
                bottleneck_speed(fl.val[idx], bp));
    } else if (first->type == 1) {
      // The vehicle crosses the front on its right.
      std::size_t k = first->k;
      double fs = phi_eval(phi, fl.pos[k] - y) * (1.0 - fl.val[k] - fl.val[k + 1]);
      y = fl.pos[k] + 2.0 * wp.event_tol;
      idx = fl.interval_index(y);
      log_event("cross", fl.pos[k], std::abs(fl.val[k + 1] - fl.val[k]), fs, ode.y_speed,
                bottleneck_speed(fl.val[idx], bp));
    } else {
      // A front catches the vehicle from behind (possible only below the
      // speed-separation threshold); the vehicle keeps reading the value of
      // the interval that now contains it.
      std::size_t k = first->k;
      double fs = phi_eval(phi, fl.pos[k] - y) * (1.0 - fl.val[k] - fl.val[k + 1]);
      y = fl.pos[k] - 2.0 * wp.event_tol;
      idx = fl.interval_index(y);
      log_event("overtaken", fl.pos[k], std::abs(fl.val[k + 1] - fl.val[k]), fs, ode.y_speed,
                bottleneck_speed(fl.val[idx], bp));
    }
  }
}

/// One full splitting cycle per window: evolve fronts and vehicle, apply the
/// Euler source update at the window end, re-sample around the new vehicle
/// position, and resolve the jumps entropically for the next window.
inline RunRecord run_wft(const Scenario& s, const WftParams* params_override = nullptr) {
  s.validate();
  if (s.model != ModelVariant::Single)
    throw ConfigError("wft solver supports only the single-vehicle model");
  const BottleneckParams& bp = s.bottlenecks[0].params;
  double dt_default = s.numerics.dt ? *s.numerics.dt : s.numerics.safety * s.numerics.dx / (2.0 * bp.phi.v_bar);
  WftParams wp = params_override ? *params_override : WftParams::for_level(s.numerics.nu, dt_default);
  wp.validate();
  double phi_lip = phi_prime_sup(bp.phi);
  if (!(wp.dt * phi_lip < 1.0))
    throw ConfigError("wft: source step needs dt * sup|phi'| < 1 (dt <= " + std::to_string(1.0 / phi_lip) + ")");

  RunRecord rec;
  rec.diagnostics.solver = "wft";
  rec.diagnostics.dt = wp.dt;
  rec.diagnostics.k_phi = k_phi(bp.phi);

  double rho_min = s.initial_density.min_value();
  double rho_sup = s.initial_density.max_value();
  auto validity = validity_report(rho_min, rho_sup, bp);
  if (rho_min <= validity.rho_min_threshold)
    rec.diagnostics.warnings.push_back("speed separation unverified: min density " + std::to_string(rho_min) +
                                       " not above threshold " + std::to_string(validity.rho_min_threshold));
  if (validity.horizon == HorizonKind::Bounded && s.horizon > validity.t_max)
    rec.diagnostics.warnings.push_back("horizon " + std::to_string(s.horizon) +
                                       " exceeds the guaranteed bound " + std::to_string(validity.t_max));
  else if (validity.horizon == HorizonKind::Unverifiable)
    rec.diagnostics.warnings.push_back("horizon bound unverifiable for this datum");

  const PiecewiseConstant& datum = s.initial_density;
  FrontList fl = sample_initial([&](double x) { return datum(x); }, wp.nu, s.x_lo, s.x_hi);
  fl = resolve_entropic(fl, wp.delta_nu);
  double y = s.bottlenecks[0].position;

  auto n_cells = static_cast<std::size_t>(std::llround((s.x_hi - s.x_lo) / s.numerics.dx));
  for (std::size_t m = 0; m < n_cells; ++m)
    rec.probe_centers.push_back(s.x_lo + (static_cast<double>(m) + 0.5) * s.numerics.dx);
  auto snapshot = [&](double t) {
    rec.times.push_back(t);
    rec.density.push_back(fl.cell_averages(s.x_lo, s.numerics.dx, n_cells));
    double mass = 0.0;
    for (double c : rec.density.back()) mass += c * s.numerics.dx;
    rec.diagnostics.snapshot_mass.push_back(mass);
    rec.diagnostics.snapshot_tv.push_back(fl.total_variation());
  };
  rec.traj_times.push_back(0.0);
  rec.trajectories.assign(1, {y});
  snapshot(0.0);

  EvolveStats stats;
  stats.log = &rec.diagnostics.events;
  long n_windows = static_cast<long>(std::ceil(s.horizon / wp.dt - 1e-9));
  for (long l = 0; l < n_windows; ++l) {
    double t_here = static_cast<double>(l) * wp.dt;
    double dt_w = std::min(wp.dt, s.horizon - t_here);

    // Genericity nudge: fronts must not sit exactly on the vehicle when a
    // window opens.
    for (std::size_t k = 0; k < fl.size(); ++k)
      if (std::abs(fl.pos[k] - y) < wp.event_tol)
        fl.pos[k] += (fl.pos[k] >= y ? 2.0 : -2.0) * wp.event_tol;

    double tv_before = fl.total_variation();
    evolve_window(fl, y, bp, wp, dt_w, t_here, stats);
    double t_next = (l + 1 < n_windows) ? static_cast<double>(l + 1) * wp.dt : s.horizon;

    auto sp = apply_source(fl, y, dt_w, bp.phi);
    fl = resample_near_bottleneck(sp, y, wp.nu, wp.event_tol, wp.keep_threshold);
    fl.prune(1e-14);
    fl = resolve_entropic(fl, wp.delta_nu);

    double tv_after = fl.total_variation();
    rec.diagnostics.max_tv_excess =
        std::max(rec.diagnostics.max_tv_excess, tv_after - tv_before - rec.diagnostics.k_phi * dt_w);

    rec.traj_times.push_back(t_next);
    rec.trajectories[0].push_back(y);
    if ((l + 1) % s.numerics.output_stride == 0) snapshot(t_next);
  }
  rec.diagnostics.event_count = stats.events;
  return rec;
}

}  // namespace mbt
