#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "mbt/grid.hpp"
#include "mbt/model.hpp"
#include "mbt/record.hpp"
#include "mbt/riemann.hpp"
#include "mbt/scenario.hpp"

namespace mbt {

/// Slow vehicles in a simulation: positions (ascending for the
/// non-overtaking model) plus per-vehicle parameters.
struct BottleneckState {
  std::vector<double> positions;
  std::vector<BottleneckParams> params;

  std::size_t count() const { return positions.size(); }

  static BottleneckState from_scenario(const Scenario& s) {
    BottleneckState b;
    for (const auto& spec : s.bottlenecks) {
      b.positions.push_back(spec.position);
      b.params.push_back(spec.params);
    }
    return b;
  }
};

struct SimState {
  double t{0.0};
  long step_index{0};
  DensityGrid grid;
  BottleneckState bottlenecks;
  ModelVariant model{ModelVariant::Single};
};

/// Capacity factor at x for the active model: the single profile, the
/// pointwise minimum (vehicles may overlap), or the product (vehicles keep
/// their supports disjoint, so at most one factor is below its plateau).
inline double combined_phi(double x, const BottleneckState& b, ModelVariant model) {
  switch (model) {
    case ModelVariant::Single:
      return phi_eval(b.params[0].phi, x - b.positions[0]);
    case ModelVariant::MultiA: {
      double v = phi_eval(b.params[0].phi, x - b.positions[0]);
      for (std::size_t i = 1; i < b.count(); ++i)
        v = std::min(v, phi_eval(b.params[i].phi, x - b.positions[i]));
      return v;
    }
    case ModelVariant::MultiB: {
      double v = 1.0;
      for (std::size_t i = 0; i < b.count(); ++i) v *= phi_eval(b.params[i].phi, x - b.positions[i]);
      return v;
    }
  }
  return 1.0;
}

/// Upper bound for sup_x of the capacity factor, used by the CFL bound.
inline double phi_envelope_sup(const BottleneckState& b, ModelVariant model) {
  switch (model) {
    case ModelVariant::Single:
      return b.params[0].phi.v_bar;
    case ModelVariant::MultiA: {
      double v = 0.0;
      for (const auto& p : b.params) v = std::max(v, p.phi.v_bar);
      return v;
    }
    case ModelVariant::MultiB: {
      double v = 1.0;
      for (const auto& p : b.params) v *= p.phi.v_bar;
      return v;
    }
  }
  return 1.0;
}

/// Admissible time step: safety * dx / (2 sup Phi). At safety = 1 this is
/// exactly the bound that keeps the scheme monotone on [0, 1].
inline double cfl_dt(const DensityGrid& grid, const BottleneckState& b, ModelVariant model, double safety) {
  grid.validate();
  if (!(safety > 0.0 && safety <= 1.0)) throw ConfigError("cfl_dt: safety must lie in (0, 1]");
  return safety * grid.dx / (2.0 * phi_envelope_sup(b, model));
}

struct DensityStepResult {
  std::vector<double> cells;
  double flux_left{0.0};   // flux through the left boundary interface
  double flux_right{0.0};  // flux through the right boundary interface
};

namespace detail {
inline void settle_into_unit_interval(std::vector<double>& cells, double t) {
  for (double& c : cells) {
    if (c < 0.0 || c > 1.0) {
      if (c < -1e-12 || c > 1.0 + 1e-12) throw SolverError("density left [0,1]", t);
      c = std::clamp(c, 0.0, 1.0);
    }
  }
}
}  // namespace detail

/// One conservative Godunov step with the vehicle positions frozen: the
/// interface flux is the demand-supply flux scaled by Phi evaluated at the
/// interface. Refuses time steps above the CFL bound.
inline DensityStepResult density_step(const SimState& st, double dt) {
  const DensityGrid& g = st.grid;
  double bound = g.dx / (2.0 * phi_envelope_sup(st.bottlenecks, st.model));
  if (dt > bound * (1.0 + 1e-9)) throw ConfigError("density_step: dt violates the CFL bound");
  std::size_t n = g.size();
  DensityStepResult out;
  out.cells.resize(n);
  double lambda = dt / g.dx;
  double f_prev = godunov_flux({g.ghost_value_left(), g.cells[0]},
                               combined_phi(g.interface(0), st.bottlenecks, st.model));
  out.flux_left = f_prev;
  for (std::size_t m = 0; m < n; ++m) {
    double right_state = (m + 1 < n) ? g.cells[m + 1] : g.ghost_value_right();
    double f_next = godunov_flux({g.cells[m], right_state},
                                 combined_phi(g.interface(m + 1), st.bottlenecks, st.model));
    out.cells[m] = g.cells[m] - lambda * (f_next - f_prev);
    f_prev = f_next;
  }
  out.flux_right = f_prev;
  detail::settle_into_unit_interval(out.cells, st.t);
  return out;
}

/// Split variant (single vehicle): homogeneous Godunov step with the
/// capacity factor frozen at each cell center, then one Euler step of the
/// geometric source. First-order consistent with the same system.
inline DensityStepResult density_step_split(const SimState& st, double dt) {
  if (st.model != ModelVariant::Single)
    throw ConfigError("density_step_split: only the single-vehicle model is supported");
  const DensityGrid& g = st.grid;
  const PhiProfile& phi = st.bottlenecks.params[0].phi;
  double y = st.bottlenecks.positions[0];
  double bound = g.dx / (2.0 * phi.v_bar);
  if (dt > bound * (1.0 + 1e-9)) throw ConfigError("density_step_split: dt violates the CFL bound");
  std::size_t n = g.size();
  DensityStepResult out;
  out.cells.resize(n);
  double lambda = dt / g.dx;
  for (std::size_t m = 0; m < n; ++m) {
    double phi_c = phi_eval(phi, g.center(m) - y);
    double left_state = (m > 0) ? g.cells[m - 1] : g.ghost_value_left();
    double right_state = (m + 1 < n) ? g.cells[m + 1] : g.ghost_value_right();
    double f_in = godunov_flux({left_state, g.cells[m]}, phi_c);
    double f_out = godunov_flux({g.cells[m], right_state}, phi_c);
    double star = g.cells[m] - lambda * (f_out - f_in);
    star = std::clamp(star, 0.0, 1.0);
    out.cells[m] = star + dt * source_term(star, g.center(m) - y, phi);
    if (m == 0) out.flux_left = f_in;
    if (m + 1 == n) out.flux_right = f_out;
  }
  detail::settle_into_unit_interval(out.cells, st.t);
  return out;
}

struct AdvanceResult {
  PiecewiseLinear traj;  // over local time [0, dt]
  bool exited{false};
};

/// Move one vehicle for one step, reading the already-updated density. The
/// vehicle keeps the speed of its own cell until it reaches the cell's right
/// interface, then continues with the next cell's speed. CFL plus
/// w_max < v_bar guarantee at most one interface crossing per step.
inline AdvanceResult advance_single_bottleneck(double y, const DensityGrid& updated, const BottleneckParams& p,
                                               double dt) {
  AdvanceResult res;
  res.traj = PiecewiseLinear(0.0, y);
  if (dt <= 0.0) return res;
  std::ptrdiff_t c = updated.cell_index(y);
  if (c < 0 || c >= static_cast<std::ptrdiff_t>(updated.size())) {
    res.exited = true;
    return res;
  }
  double v0 = bottleneck_speed(updated.cells[static_cast<std::size_t>(c)], p);
  double t_cross = dt + 1.0;
  if (v0 > 0.0) t_cross = (updated.right_edge(static_cast<std::size_t>(c)) - y) / v0;
  if (t_cross <= dt) {
    double x_cross = updated.right_edge(static_cast<std::size_t>(c));
    res.traj.append(t_cross, x_cross);
    if (c + 1 >= static_cast<std::ptrdiff_t>(updated.size())) {
      res.exited = true;
      return res;
    }
    double v1 = bottleneck_speed(updated.cells[static_cast<std::size_t>(c + 1)], p);
    res.traj.append(dt, x_cross + (dt - t_cross) * v1);
  } else {
    res.traj.append(dt, y + dt * v0);
  }
  return res;
}

struct MultiAdvanceResult {
  std::vector<PiecewiseLinear> trajs;
  bool exited{false};
};

/// Overtaking model: every vehicle moves independently.
inline MultiAdvanceResult advance_bottlenecks_model_a(const BottleneckState& b, const DensityGrid& updated,
                                                      double dt) {
  MultiAdvanceResult out;
  for (std::size_t i = 0; i < b.count(); ++i) {
    auto r = advance_single_bottleneck(b.positions[i], updated, b.params[i], dt);
    out.exited = out.exited || r.exited;
    out.trajs.push_back(std::move(r.traj));
  }
  return out;
}

/// Non-overtaking model: the leader moves freely; each follower moves freely
/// until its distance to the (already computed) vehicle ahead shrinks to the
/// sum of the two support half-widths, and is dragged along from then on.
/// The touch time is found exactly on the piecewise-linear trajectories.
inline MultiAdvanceResult advance_bottlenecks_model_b(const BottleneckState& b, const DensityGrid& updated,
                                                      double dt, double* min_gap_out = nullptr) {
  std::size_t p = b.count();
  MultiAdvanceResult out;
  out.trajs.resize(p);
  auto lead = advance_single_bottleneck(b.positions[p - 1], updated, b.params[p - 1], dt);
  out.exited = lead.exited;
  out.trajs[p - 1] = std::move(lead.traj);
  for (std::size_t ii = p - 1; ii-- > 0;) {
    double beta_sum = b.params[ii + 1].phi.beta + b.params[ii].phi.beta;
    double entry_gap = b.positions[ii + 1] - b.positions[ii] - beta_sum;
    if (entry_gap < -1e-12)
      throw SolverError("ordering invariant violated on entry (gap " + std::to_string(entry_gap) + ")");
    auto tent = advance_single_bottleneck(b.positions[ii], updated, b.params[ii], dt);
    out.exited = out.exited || tent.exited;
    const PiecewiseLinear& ahead = out.trajs[ii + 1];
    double t_hit = 0.0;
    if (!tent.exited && !out.exited && ahead.first_touch_from_above(tent.traj, beta_sum, t_hit)) {
      PiecewiseLinear clamped;
      for (std::size_t k = 0; k < tent.traj.ts.size() && tent.traj.ts[k] < t_hit; ++k)
        clamped.append(tent.traj.ts[k], tent.traj.xs[k]);
      clamped.append(t_hit, ahead(t_hit) - beta_sum);
      for (std::size_t k = 0; k < ahead.ts.size(); ++k)
        if (ahead.ts[k] > t_hit) clamped.append(ahead.ts[k], ahead.xs[k] - beta_sum);
      if (clamped.back_time() < dt) clamped.append(dt, ahead(dt) - beta_sum);
      out.trajs[ii] = std::move(clamped);
    } else {
      out.trajs[ii] = std::move(tent.traj);
    }
    if (min_gap_out) {
      for (double tk : out.trajs[ii].ts)
        *min_gap_out = std::min(*min_gap_out, ahead(tk) - out.trajs[ii](tk) - beta_sum);
      for (double tk : ahead.ts)
        *min_gap_out = std::min(*min_gap_out, ahead(tk) - out.trajs[ii](tk) - beta_sum);
    }
  }
  return out;
}

struct GofOptions {
  bool split_source{false};
};

/// Run the full fractional-step scheme over [0, horizon]: one density step
/// with frozen vehicle positions, then the vehicle update on the new
/// density, per time step. Records trajectories every step and density
/// snapshots every output stride.
inline RunRecord run_gof(const Scenario& s, const GofOptions& opts = {}) {
  s.validate();
  DensityGrid grid = DensityGrid::project(s.initial_density, s.x_lo, s.x_hi, s.numerics.dx);
  BottleneckState bots = BottleneckState::from_scenario(s);
  if (opts.split_source && s.model != ModelVariant::Single)
    throw ConfigError("gof-split supports only the single-vehicle model");

  double dt_bound = cfl_dt(grid, bots, s.model, 1.0);
  double dt = s.numerics.dt ? *s.numerics.dt : s.numerics.safety * dt_bound;
  if (dt > dt_bound * (1.0 + 1e-12))
    throw ConfigError("scenario.numerics.dt: violates the CFL bound " + std::to_string(dt_bound));
  double w_sup = 0.0, phi_prime_max = 0.0;
  for (const auto& bp : bots.params) {
    w_sup = std::max(w_sup, bp.w_max);
    phi_prime_max = std::max(phi_prime_max, phi_prime_sup(bp.phi));
  }
  if (!(w_sup * dt < grid.dx))
    throw ConfigError("scenario.numerics.dt: vehicles must cross at most one interface per step");
  if (opts.split_source && !(dt * phi_prime_max < 1.0))
    throw ConfigError("scenario.numerics.dt: source step needs dt * sup|phi'| < 1");

  SimState st{0.0, 0, std::move(grid), std::move(bots), s.model};
  RunRecord rec;
  rec.diagnostics.solver = opts.split_source ? "gof-split" : "gof";
  rec.diagnostics.dt = dt;
  rec.diagnostics.cfl_number = dt / dt_bound;
  rec.diagnostics.k_phi = k_phi(st.bottlenecks.params[0].phi);
  for (std::size_t m = 0; m < st.grid.size(); ++m) rec.probe_centers.push_back(st.grid.center(m));
  rec.traj_times.push_back(0.0);
  rec.trajectories.assign(st.bottlenecks.count(), {});
  for (std::size_t i = 0; i < st.bottlenecks.count(); ++i)
    rec.trajectories[i].push_back(st.bottlenecks.positions[i]);

  auto tv_of = [](const std::vector<double>& c) {
    double tv = 0.0;
    for (std::size_t m = 1; m < c.size(); ++m) tv += std::abs(c[m] - c[m - 1]);
    return tv;
  };
  auto snapshot = [&]() {
    rec.times.push_back(st.t);
    rec.density.push_back(st.grid.cells);
    rec.diagnostics.snapshot_mass.push_back(st.grid.mass());
    rec.diagnostics.snapshot_tv.push_back(tv_of(st.grid.cells));
  };
  snapshot();

  const std::vector<double> initial_cells = st.grid.cells;
  const std::size_t guard = std::min<std::size_t>(5, st.grid.size());
  double t_end = s.horizon;
  long n_steps = static_cast<long>(std::ceil(t_end / dt - 1e-9));
  for (long l = 0; l < n_steps; ++l) {
    double dt_l = std::min(dt, t_end - static_cast<double>(l) * dt);
    double mass_before = st.grid.mass();
    DensityStepResult step = opts.split_source ? density_step_split(st, dt_l) : density_step(st, dt_l);
    st.grid.cells = std::move(step.cells);
    double mass_after = st.grid.mass();
    if (!opts.split_source) {
      double residual = std::abs(mass_after - mass_before + dt_l * (step.flux_right - step.flux_left));
      rec.diagnostics.max_mass_residual = std::max(rec.diagnostics.max_mass_residual, residual);
    }

    MultiAdvanceResult adv;
    switch (st.model) {
      case ModelVariant::Single: {
        auto r = advance_single_bottleneck(st.bottlenecks.positions[0], st.grid, st.bottlenecks.params[0], dt_l);
        adv.exited = r.exited;
        adv.trajs.push_back(std::move(r.traj));
        break;
      }
      case ModelVariant::MultiA:
        adv = advance_bottlenecks_model_a(st.bottlenecks, st.grid, dt_l);
        break;
      case ModelVariant::MultiB:
        adv = advance_bottlenecks_model_b(st.bottlenecks, st.grid, dt_l, &rec.diagnostics.min_ordering_gap);
        break;
    }
    if (adv.exited) {
      rec.diagnostics.truncated = true;
      rec.diagnostics.warnings.push_back("vehicle reached the grid boundary at t=" + std::to_string(st.t) +
                                         "; run stopped early");
      break;
    }
    for (std::size_t i = 0; i < st.bottlenecks.count(); ++i)
      st.bottlenecks.positions[i] = adv.trajs[i].back_value();

    st.t = (l + 1 < n_steps) ? static_cast<double>(l + 1) * dt : t_end;
    st.step_index += 1;
    rec.traj_times.push_back(st.t);
    for (std::size_t i = 0; i < st.bottlenecks.count(); ++i)
      rec.trajectories[i].push_back(st.bottlenecks.positions[i]);

    if (!rec.diagnostics.boundary_touched) {
      for (std::size_t k = 0; k < guard; ++k) {
        if (std::abs(st.grid.cells[k] - initial_cells[k]) > 1e-12 ||
            std::abs(st.grid.cells[st.grid.size() - 1 - k] - initial_cells[st.grid.size() - 1 - k]) > 1e-12) {
          rec.diagnostics.boundary_touched = true;
          rec.diagnostics.warnings.push_back("wave within 5 cells of a boundary at t=" + std::to_string(st.t));
          break;
        }
      }
    }
    if (st.step_index % s.numerics.output_stride == 0) snapshot();
  }
  return rec;
}

}  // namespace mbt
