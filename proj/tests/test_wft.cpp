#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mbt/wft.hpp"

using namespace mbt;

namespace {
PhiProfile paper_phi() { return PhiProfile::bump(1.0, 0.6, 0.1); }
PhiProfile flat_phi() { return PhiProfile::bump(1.0, 1.0, 0.1); }
}  // namespace

TEST_CASE("sample_initial: constants, dyadic steps, monotone data") {
  auto constant = sample_initial([](double) { return 0.42; }, 6, 0.0, 3.0);
  CHECK(constant.size() == 0);
  CHECK(constant.left_state() == 0.42);

  // A jump exactly on a lattice point is reproduced exactly.
  PiecewiseConstant step({0.5}, {0.2, 0.8});
  auto fl = sample_initial([&](double x) { return step(x); }, 5, 0.0, 1.0);
  REQUIRE(fl.size() == 1);
  CHECK(fl.pos[0] == 0.5);
  CHECK(fl.front(0).left == 0.2);
  CHECK(fl.front(0).right == 0.8);

  // A jump off the lattice lands on the next lattice point to its right.
  PiecewiseConstant step2({1.4}, {0.9, 0.45});
  auto fl2 = sample_initial([&](double x) { return step2(x); }, 5, 0.0, 3.0);
  REQUIRE(fl2.size() == 1);
  CHECK(fl2.pos[0] == Catch::Approx(45.0 / 32.0).margin(1e-15));
  CHECK(std::abs(fl2.pos[0] - 1.4) <= std::pow(2.0, -5));

  // Smooth monotone data: sampling does not add variation and converges.
  auto smooth = [](double x) { return 0.3 + 0.2 * (1.0 + std::tanh(x - 1.5)); };
  double tv_true = smooth(3.0) - smooth(0.0);
  double prev_gap = 1.0;
  for (int nu = 4; nu <= 8; ++nu) {
    auto f = sample_initial(smooth, nu, 0.0, 3.0);
    CHECK(f.total_variation() <= tv_true + 1e-12);
    double gap = tv_true - f.total_variation();
    CHECK(gap >= -1e-12);
    CHECK(gap <= prev_gap + 1e-12);
    prev_gap = gap;
  }
  CHECK(prev_gap < 1e-3);
}

TEST_CASE("fan_riemann slices and telescoping") {
  auto one = fan_riemann({0.3, 0.9}, 0.1, 2.0);
  REQUIRE(one.size() == 1);
  CHECK(one[0].kind == FrontKind::Shock);

  auto single_slice = fan_riemann({0.9, 0.45}, 0.45, 2.0);
  REQUIRE(single_slice.size() == 1);
  CHECK(single_slice[0].kind == FrontKind::RarefactionShock);

  auto five = fan_riemann({0.9, 0.45}, 0.1, 2.0);
  REQUIRE(five.size() == 5);
  for (const auto& f : five) {
    CHECK(f.kind == FrontKind::RarefactionShock);
    CHECK(f.left - f.right == Catch::Approx(0.09).margin(1e-14));
  }
  CHECK(five.front().left == 0.9);
  CHECK(five.back().right == 0.45);
  for (std::size_t k = 1; k < five.size(); ++k) CHECK(five[k].left == five[k - 1].right);

  CHECK(fan_riemann({0.4, 0.4}, 0.1).empty());
}

TEST_CASE("resolve_entropic reclassifies and splits") {
  FrontList fl;
  fl.val = {0.9, 0.45, 0.7};
  fl.pos = {1.0, 2.0};
  fl.kind = {FrontKind::SourceGenerated, FrontKind::SourceGenerated};
  auto out = resolve_entropic(fl, 0.1);
  REQUIRE(out.size() == 6);  // 5 fan slices + 1 shock
  for (int k = 0; k < 5; ++k) {
    CHECK(out.kind[k] == FrontKind::RarefactionShock);
    CHECK(out.pos[k] == 1.0);
  }
  CHECK(out.kind[5] == FrontKind::Shock);
  CHECK(out.total_variation() == Catch::Approx(fl.total_variation()).margin(1e-14));
}

TEST_CASE("evolve_window: pure vehicle drift is exact") {
  FrontList fl;
  fl.val = {0.6};
  double y = 1.0;
  BottleneckParams bp{0.4, paper_phi()};
  auto wp = WftParams::for_level(5, 0.02);
  EvolveStats stats;
  evolve_window(fl, y, bp, wp, 0.02, 0.0, stats);
  CHECK(y == Catch::Approx(1.0 + 0.02 * 0.4 * 0.4).margin(1e-15));
  CHECK(stats.events == 0);
}

TEST_CASE("evolve_window: two approaching shocks merge at the exact intersection") {
  // Away from the vehicle the capacity factor is the plateau, so both
  // fronts move at constant speed and the collision time is closed-form.
  FrontList fl;
  fl.val = {0.5, 0.8, 0.9};
  fl.pos = {0.2, 0.4};
  fl.kind = {FrontKind::Shock, FrontKind::Shock};
  double y = 50.0;  // far away
  BottleneckParams bp{0.4, paper_phi()};
  auto wp = WftParams::for_level(5, 1.0);
  EvolveStats stats;
  std::vector<WftEvent> log;
  stats.log = &log;
  evolve_window(fl, y, bp, wp, 1.0, 0.0, stats);
  // speeds: -0.3 and -0.7, gap 0.2 closes at t = 0.5, meeting at 0.05;
  // merged (0.5, 0.9) shock then travels at -0.4 for the remaining 0.5.
  REQUIRE(fl.size() == 1);
  CHECK(fl.front(0).left == 0.5);
  CHECK(fl.front(0).right == 0.9);
  CHECK(fl.front(0).kind == FrontKind::Shock);
  CHECK(fl.pos[0] == Catch::Approx(0.05 - 0.4 * 0.5).margin(1e-8));
  REQUIRE(log.size() == 1);
  CHECK(log[0].kind == "merge");
  CHECK(log[0].t == Catch::Approx(0.5).margin(1e-8));
  CHECK(log[0].pos == Catch::Approx(0.05).margin(1e-8));
}

TEST_CASE("evolve_window: parallel fronts never interact") {
  FrontList fl;
  fl.val = {0.5, 0.9, 0.5};
  fl.pos = {0.0, 0.1};
  fl.kind = {FrontKind::Shock, FrontKind::RarefactionShock};
  double y = 50.0;
  BottleneckParams bp{0.4, paper_phi()};
  auto wp = WftParams::for_level(3, 2.0);
  EvolveStats stats;
  evolve_window(fl, y, bp, wp, 2.0, 0.0, stats);
  // Both jumps have state sum 1.4, hence equal speed -0.4: order kept.
  CHECK(fl.size() == 2);
  CHECK(fl.pos[1] - fl.pos[0] == Catch::Approx(0.1).margin(1e-9));
  CHECK(stats.events == 0);
}

TEST_CASE("evolve_window: vehicle crosses a slow front and logs it") {
  // Vehicle in low density behind a faster forward front: no crossing.
  FrontList fl;
  fl.val = {0.1, 0.5, 0.9};
  fl.pos = {1.0, 30.0};
  fl.kind = {FrontKind::Shock, FrontKind::Shock};
  double y = 0.9;
  BottleneckParams bp{0.4, paper_phi()};
  auto wp = WftParams::for_level(5, 1.0);
  EvolveStats stats;
  std::vector<WftEvent> log;
  stats.log = &log;
  evolve_window(fl, y, bp, wp, 1.0, 0.0, stats);
  CHECK(log.empty());
  CHECK(y == Catch::Approx(0.9 + 0.36).margin(1e-9));

  // A backward-moving shock sweeps over the vehicle.
  FrontList fl2;
  fl2.val = {0.3, 0.9};
  fl2.pos = {1.2};
  fl2.kind = {FrontKind::Shock};
  double y2 = 1.0;
  std::vector<WftEvent> log2;
  EvolveStats stats2;
  stats2.log = &log2;
  evolve_window(fl2, y2, bp, wp, 1.0, 0.0, stats2);
  REQUIRE(log2.size() == 1);
  CHECK(log2[0].kind == "cross");
  CHECK(log2[0].strength == Catch::Approx(0.6).margin(1e-12));
  CHECK(log2[0].y_speed_before == Catch::Approx(0.28).margin(1e-12));
  CHECK(log2[0].y_speed_after == Catch::Approx(0.04).margin(1e-12));
  // After crossing the vehicle sits in rho = 0.9.
  double t_rest = 1.0 - log2[0].t;
  CHECK(y2 == Catch::Approx(log2[0].pos + 0.04 * t_rest).margin(1e-6));
}

TEST_CASE("apply_source: pointwise Euler update inside the zone only") {
  FrontList fl;
  fl.val = {0.5};
  auto phi = paper_phi();
  auto sp = apply_source(fl, 2.0, 0.01, phi);
  CHECK(sp.value(1.7, FrontList::Side::Right) == 0.5);  // outside [1.9, 2.1]
  CHECK(sp.value(2.5, FrontList::Side::Right) == 0.5);
  double x = 2.05;
  CHECK(sp.value(x, FrontList::Side::Right) ==
        Catch::Approx(0.5 - 0.01 * 0.25 * phi_prime(phi, x - 2.0)).margin(1e-15));

  FrontList jam;
  jam.val = {1.0};
  CHECK(apply_source(jam, 2.0, 0.01, phi).value(2.05, FrontList::Side::Right) == 1.0);
  FrontList empty;
  empty.val = {0.0};
  CHECK(apply_source(empty, 2.0, 0.01, phi).value(2.05, FrontList::Side::Right) == 0.0);

  // One-sided limits at a base jump follow the base's one-sided values.
  FrontList two;
  two.val = {0.4, 0.6};
  two.pos = {2.02};
  two.kind = {FrontKind::Shock};
  auto sp2 = apply_source(two, 2.0, 0.01, phi);
  CHECK(sp2.value(2.02, FrontList::Side::Left) ==
        Catch::Approx(0.4 - 0.01 * 0.4 * 0.6 * phi_prime(phi, 0.02)).margin(1e-15));
  CHECK(sp2.value(2.02, FrontList::Side::Right) ==
        Catch::Approx(0.6 - 0.01 * 0.6 * 0.4 * phi_prime(phi, 0.02)).margin(1e-15));
}

TEST_CASE("resample: identity when the source is inactive") {
  FrontList fl;
  fl.val = {0.3, 0.7, 0.5};
  fl.pos = {1.95, 2.3};
  fl.kind = {FrontKind::Shock, FrontKind::RarefactionShock};
  auto sp = apply_source(fl, 2.0, 0.0, paper_phi());  // dt = 0: no update
  auto out = resample_near_bottleneck(sp, 2.0, 6);
  out.prune(0.0);
  REQUIRE(out.size() == fl.size());
  for (std::size_t k = 0; k < fl.size(); ++k) {
    CHECK(out.pos[k] == fl.pos[k]);
    CHECK(out.val[k] == fl.val[k]);
    CHECK(out.kind[k] == fl.kind[k]);
  }
}

TEST_CASE("resample: pre-existing jumps keep both one-sided limits exactly") {
  FrontList fl;
  fl.val = {0.45, 0.75};
  fl.pos = {2.033};  // inside the zone, off the lattice
  fl.kind = {FrontKind::Shock};
  auto phi = paper_phi();
  double dt = 0.01, y = 2.0;
  auto sp = apply_source(fl, y, dt, phi);
  auto out = resample_near_bottleneck(sp, y, 6);
  CHECK(out.value_at(2.033, FrontList::Side::Left) ==
        Catch::Approx(sp.value(2.033, FrontList::Side::Left)).margin(1e-15));
  CHECK(out.value_at(2.033, FrontList::Side::Right) ==
        Catch::Approx(sp.value(2.033, FrontList::Side::Right)).margin(1e-15));
  bool found = false;
  for (double p : out.pos) found = found || p == 2.033;
  CHECK(found);
}

TEST_CASE("resample: uniform dyadic sampling of a smooth bump") {
  FrontList fl;
  fl.val = {0.5};
  auto phi = paper_phi();
  double dt = 0.01, y = 2.0;
  int nu = 5;
  auto sp = apply_source(fl, y, dt, phi);
  auto out = resample_near_bottleneck(sp, y, nu);
  double spacing = 2.0 * phi.beta / 32.0;
  for (int j = 1; j + 1 <= 32; ++j) {
    double a = (y - phi.beta) + j * spacing;
    double mid = a + 0.5 * spacing;
    CHECK(out.value_at(mid) == Catch::Approx(sp.value(a, FrontList::Side::Right)).margin(1e-15));
  }
  CHECK(out.value_at(y - 2.0 * phi.beta) == 0.5);
  CHECK(out.value_at(y + 2.0 * phi.beta) == 0.5);
}

TEST_CASE("run_wft: flat capacity keeps a constant datum constant and y linear") {
  Scenario s;
  s.name = "const";
  s.x_lo = 0.0;
  s.x_hi = 4.0;
  s.horizon = 1.0;
  s.initial_density = PiecewiseConstant::constant(0.5);
  s.model = ModelVariant::Single;
  s.bottlenecks = {{2.0, {0.4, flat_phi()}}};
  s.numerics.dx = 0.02;
  s.numerics.dt = 0.01;
  s.numerics.nu = 5;
  auto rec = run_wft(s);
  CHECK(rec.diagnostics.event_count == 0);
  for (std::size_t k = 0; k < rec.traj_times.size(); ++k)
    CHECK(rec.trajectories[0][k] == Catch::Approx(2.0 + 0.2 * rec.traj_times[k]).margin(1e-12));
  for (double v : rec.density.back()) CHECK(v == 0.5);

  // Jammed road: source vanishes at rho = 1, vehicle frozen.
  s.initial_density = PiecewiseConstant::constant(1.0);
  s.bottlenecks = {{2.0, {0.4, paper_phi()}}};
  auto rec2 = run_wft(s);
  CHECK(rec2.trajectories[0].back() == 2.0);
  for (double v : rec2.density.back()) CHECK(v == 1.0);
}

TEST_CASE("run_wft: shock tracks at -0.2 before any interaction (fig6 setup)") {
  Scenario s = builtin_scenario("fig6");
  s.horizon = 1.0;
  s.numerics.nu = 5;
  s.numerics.output_stride = 100;  // snapshots at 0 and T only
  auto rec = run_wft(s);
  REQUIRE(rec.times.size() == 2);
  const auto& last = rec.density.back();
  double x_shock = 0.0;
  for (std::size_t m = 0; m + 1 < last.size(); ++m)
    if (last[m] < 0.6 && last[m + 1] >= 0.6)
      x_shock = rec.probe_centers[m] +
                (0.6 - last[m]) / (last[m + 1] - last[m]) * (rec.probe_centers[m + 1] - rec.probe_centers[m]);
  double x0 = 45.0 / 32.0;  // sampled jump position at nu = 5
  CHECK(x_shock == Catch::Approx(x0 - 0.2).margin(0.02));
  CHECK(rec.diagnostics.max_tv_excess <= 1e-12);
  bool warned = false;
  for (const auto& w : rec.diagnostics.warnings) warned = warned || w.find("speed separation") != std::string::npos;
  CHECK(warned);
}

TEST_CASE("run_wft: vehicle accelerates through a rarefaction fan (fig5 setup)") {
  Scenario s = builtin_scenario("fig5");
  s.initial_density = PiecewiseConstant({0.7}, {0.9, 0.45});  // fan close to y0 = 0.5
  s.horizon = 1.2;
  s.numerics.nu = 5;
  auto rec = run_wft(s);
  const auto& ys = rec.trajectories[0];
  const auto& ts = rec.traj_times;
  double v_early = (ys[5] - ys[0]) / (ts[5] - ts[0]);
  double v_late = (ys.back() - ys[ys.size() - 6]) / (ts.back() - ts[ts.size() - 6]);
  CHECK(v_early == Catch::Approx(0.04).margin(0.01));
  CHECK(v_late > 0.15);
  int speedups = 0;
  for (const auto& e : rec.diagnostics.events)
    if (e.kind == "cross" && e.y_speed_after > e.y_speed_before + 1e-12) ++speedups;
  CHECK(speedups >= 3);
  CHECK(rec.diagnostics.max_tv_excess <= 1e-12);
}

TEST_CASE("run_wft: snapshot cadence matches the stride formula") {
  Scenario s = builtin_scenario("fig6");
  s.horizon = 0.3;
  s.numerics.nu = 4;
  s.numerics.output_stride = 10;
  auto rec = run_wft(s);
  CHECK(rec.times.size() == 4);  // t = 0, 0.1, 0.2, 0.3
  CHECK(rec.traj_times.size() == 31);
  CHECK(rec.times.back() == Catch::Approx(0.3).margin(1e-12));
}

TEST_CASE("run_wft rejects unusable configurations") {
  Scenario s = builtin_scenario("fig8");
  CHECK_THROWS_AS(run_wft(s), ConfigError);  // multi-vehicle model

  Scenario f = builtin_scenario("fig5");
  f.numerics.dt = 0.05;  // dt * sup|phi'| > 1
  CHECK_THROWS_AS(run_wft(f), ConfigError);
}
