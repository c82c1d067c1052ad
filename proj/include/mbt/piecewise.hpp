#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

#include "mbt/errors.hpp"

namespace mbt {

/// Compensated (Neumaier) summation; keeps long reductions accurate to ~1 ulp.
class NeumaierSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_{0.0};
  double comp_{0.0};
};

/// Right-continuous piecewise-constant function: values[k] on
/// [breakpoints[k-1], breakpoints[k]), extended by the end values.
struct PiecewiseConstant {
  std::vector<double> breakpoints;
  std::vector<double> values;

  PiecewiseConstant() : values{0.0} {}
  PiecewiseConstant(std::vector<double> bps, std::vector<double> vals)
      : breakpoints(std::move(bps)), values(std::move(vals)) {
    if (values.size() != breakpoints.size() + 1)
      throw ConfigError("piecewise-constant: need one more value than breakpoints");
    for (std::size_t k = 1; k < breakpoints.size(); ++k)
      if (!(breakpoints[k - 1] < breakpoints[k]))
        throw ConfigError("piecewise-constant: breakpoints must be strictly ascending");
  }

  static PiecewiseConstant constant(double v) { return PiecewiseConstant({}, {v}); }

  double operator()(double x) const {
    auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
    return values[static_cast<std::size_t>(it - breakpoints.begin())];
  }

  double min_value() const { return *std::min_element(values.begin(), values.end()); }
  double max_value() const { return *std::max_element(values.begin(), values.end()); }

  double total_variation() const {
    double tv = 0.0;
    for (std::size_t k = 1; k < values.size(); ++k) tv += std::abs(values[k] - values[k - 1]);
    return tv;
  }

  /// Exact integral over [a, b].
  double integrate(double a, double b) const {
    if (b < a) return -integrate(b, a);
    NeumaierSum s;
    double lo = a;
    for (std::size_t k = 0; k < breakpoints.size(); ++k) {
      if (breakpoints[k] <= lo) continue;
      double hi = std::min(breakpoints[k], b);
      if (hi > lo) s.add(values[k] * (hi - lo));
      lo = hi;
      if (lo >= b) break;
    }
    if (lo < b) s.add(values.back() * (b - lo));
    return s.value();
  }
};

/// Continuous piecewise-linear function of time; used for trajectories
/// inside one time step and for whole-run trajectory comparisons.
struct PiecewiseLinear {
  std::vector<double> ts;
  std::vector<double> xs;

  PiecewiseLinear() = default;
  PiecewiseLinear(double t0, double x0) : ts{t0}, xs{x0} {}

  void append(double t, double x) {
    assert(ts.empty() || t >= ts.back());
    ts.push_back(t);
    xs.push_back(x);
  }

  double front_time() const { return ts.front(); }
  double back_time() const { return ts.back(); }
  double back_value() const { return xs.back(); }

  double operator()(double t) const {
    assert(!ts.empty());
    if (t <= ts.front()) return xs.front();
    if (t >= ts.back()) return xs.back();
    auto it = std::upper_bound(ts.begin(), ts.end(), t);
    std::size_t k = static_cast<std::size_t>(it - ts.begin());
    double t0 = ts[k - 1], t1 = ts[k];
    if (t1 == t0) return xs[k];
    double u = (t - t0) / (t1 - t0);
    return xs[k - 1] + u * (xs[k] - xs[k - 1]);
  }

  /// Earliest t in [ts.front(), ts.back()] where (*this - other)(t) == gap,
  /// approaching from above; returns false if the difference stays > gap.
  /// Both curves must share the same time span.
  bool first_touch_from_above(const PiecewiseLinear& other, double gap, double& t_hit) const {
    std::vector<double> knots;
    knots.reserve(ts.size() + other.ts.size());
    knots.insert(knots.end(), ts.begin(), ts.end());
    knots.insert(knots.end(), other.ts.begin(), other.ts.end());
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    double g_prev = (*this)(knots.front()) - other(knots.front()) - gap;
    if (g_prev <= 0.0) {
      // Already at (or below) the gap: a touch at the start counts only if
      // the difference keeps shrinking.
      for (std::size_t k = 1; k < knots.size(); ++k) {
        double g = (*this)(knots[k]) - other(knots[k]) - gap;
        if (g < g_prev - 0.0) {
          t_hit = knots.front();
          return true;
        }
        if (g > 0.0) break;
        g_prev = g;
      }
      return false;
    }
    for (std::size_t k = 1; k < knots.size(); ++k) {
      double g = (*this)(knots[k]) - other(knots[k]) - gap;
      if (g <= 0.0) {
        double t0 = knots[k - 1], t1 = knots[k];
        t_hit = (g_prev == g) ? t0 : t0 + (t1 - t0) * (g_prev / (g_prev - g));
        return true;
      }
      g_prev = g;
    }
    return false;
  }
};

}  // namespace mbt
