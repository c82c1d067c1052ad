#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mbt/errors.hpp"
#include "mbt/scenario.hpp"

namespace mbt {

/// One logged wave-front event (front merges, bottleneck/front crossings).
struct WftEvent {
  double t{0.0};
  std::string kind;  // "merge", "cross", "overtaken", "shift"
  double pos{0.0};
  double strength{0.0};
  double front_speed{0.0};
  double y_speed_before{0.0};
  double y_speed_after{0.0};
  double zone_min_density{0.0};  // min state within [y - beta, y + beta]
};

struct RunDiagnostics {
  std::string solver;
  double dt{0.0};
  double cfl_number{0.0};
  double max_mass_residual{0.0};   // per-step conservation residual (GOF)
  double min_ordering_gap{1e300};  // min over steps of gap - beta sum (MultiB)
  double max_tv_excess{-1e300};    // max over windows of TV growth minus budget (WFT)
  double k_phi{0.0};
  long event_count{0};
  bool boundary_touched{false};
  bool truncated{false};  // a vehicle left the grid before the horizon
  std::vector<std::string> warnings;
  std::vector<double> snapshot_mass;
  std::vector<double> snapshot_tv;
  std::vector<WftEvent> events;
};

/// Densities on the probe grid at output times plus per-step vehicle
/// trajectories and run diagnostics.
struct RunRecord {
  std::vector<double> times;
  std::vector<double> probe_centers;
  std::vector<std::vector<double>> density;  // density[k][m], k-th snapshot
  std::vector<double> traj_times;
  std::vector<std::vector<double>> trajectories;  // trajectories[i][k], vehicle i
  RunDiagnostics diagnostics;
};

namespace detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SolverError("cannot open output file " + path.string());
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw SolverError("write failed for " + path.string());
}

}  // namespace detail

inline nlohmann::ordered_json record_to_json(const RunRecord& r) {
  nlohmann::ordered_json j;
  j["times"] = r.times;
  j["probe_centers"] = r.probe_centers;
  j["density"] = r.density;
  j["trajectory_times"] = r.traj_times;
  j["trajectories"] = r.trajectories;
  nlohmann::ordered_json d;
  d["solver"] = r.diagnostics.solver;
  d["dt"] = r.diagnostics.dt;
  d["cfl_number"] = r.diagnostics.cfl_number;
  d["max_mass_residual"] = r.diagnostics.max_mass_residual;
  d["min_ordering_gap"] = r.diagnostics.min_ordering_gap;
  d["max_tv_excess"] = r.diagnostics.max_tv_excess;
  d["k_phi"] = r.diagnostics.k_phi;
  d["event_count"] = r.diagnostics.event_count;
  d["boundary_touched"] = r.diagnostics.boundary_touched;
  d["truncated"] = r.diagnostics.truncated;
  d["warnings"] = r.diagnostics.warnings;
  d["snapshot_mass"] = r.diagnostics.snapshot_mass;
  d["snapshot_tv"] = r.diagnostics.snapshot_tv;
  auto& ev = d["events"] = nlohmann::ordered_json::array();
  for (const auto& e : r.diagnostics.events) {
    nlohmann::ordered_json je;
    je["t"] = e.t;
    je["kind"] = e.kind;
    je["pos"] = e.pos;
    je["strength"] = e.strength;
    je["front_speed"] = e.front_speed;
    je["y_speed_before"] = e.y_speed_before;
    je["y_speed_after"] = e.y_speed_after;
    je["zone_min_density"] = e.zone_min_density;
    ev.push_back(std::move(je));
  }
  j["diagnostics"] = std::move(d);
  return j;
}

inline RunRecord record_from_json(const nlohmann::ordered_json& j) {
  RunRecord r;
  r.times = j.at("times").get<std::vector<double>>();
  r.probe_centers = j.at("probe_centers").get<std::vector<double>>();
  r.density = j.at("density").get<std::vector<std::vector<double>>>();
  r.traj_times = j.at("trajectory_times").get<std::vector<double>>();
  r.trajectories = j.at("trajectories").get<std::vector<std::vector<double>>>();
  const auto& d = j.at("diagnostics");
  r.diagnostics.solver = d.at("solver").get<std::string>();
  r.diagnostics.dt = d.at("dt").get<double>();
  r.diagnostics.cfl_number = d.at("cfl_number").get<double>();
  r.diagnostics.max_mass_residual = d.at("max_mass_residual").get<double>();
  r.diagnostics.min_ordering_gap = d.at("min_ordering_gap").get<double>();
  r.diagnostics.max_tv_excess = d.at("max_tv_excess").get<double>();
  r.diagnostics.k_phi = d.at("k_phi").get<double>();
  r.diagnostics.event_count = d.at("event_count").get<long>();
  r.diagnostics.boundary_touched = d.at("boundary_touched").get<bool>();
  r.diagnostics.truncated = d.at("truncated").get<bool>();
  r.diagnostics.warnings = d.at("warnings").get<std::vector<std::string>>();
  r.diagnostics.snapshot_mass = d.at("snapshot_mass").get<std::vector<double>>();
  r.diagnostics.snapshot_tv = d.at("snapshot_tv").get<std::vector<double>>();
  for (const auto& je : d.at("events")) {
    WftEvent e;
    e.t = je.at("t").get<double>();
    e.kind = je.at("kind").get<std::string>();
    e.pos = je.at("pos").get<double>();
    e.strength = je.at("strength").get<double>();
    e.front_speed = je.at("front_speed").get<double>();
    e.y_speed_before = je.at("y_speed_before").get<double>();
    e.y_speed_after = je.at("y_speed_after").get<double>();
    e.zone_min_density = je.at("zone_min_density").get<double>();
    r.diagnostics.events.push_back(std::move(e));
  }
  return r;
}

inline std::string trajectory_csv(const RunRecord& r) {
  std::string s = "t";
  for (std::size_t i = 0; i < r.trajectories.size(); ++i) s += ",y_" + std::to_string(i + 1);
  s += "\n";
  for (std::size_t k = 0; k < r.traj_times.size(); ++k) {
    s += detail::fmt17(r.traj_times[k]);
    for (const auto& traj : r.trajectories) s += "," + detail::fmt17(traj[k]);
    s += "\n";
  }
  return s;
}

inline std::string density_csv(const RunRecord& r) {
  std::string s = "t";
  for (double x : r.probe_centers) s += "," + detail::fmt17(x);
  s += "\n";
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    s += detail::fmt17(r.times[k]);
    for (double v : r.density[k]) s += "," + detail::fmt17(v);
    s += "\n";
  }
  return s;
}

inline std::string diagnostics_csv(const RunRecord& r) {
  std::string s = "t,mass,tv\n";
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    s += detail::fmt17(r.times[k]);
    s += ",";
    if (k < r.diagnostics.snapshot_mass.size()) s += detail::fmt17(r.diagnostics.snapshot_mass[k]);
    s += ",";
    if (k < r.diagnostics.snapshot_tv.size()) s += detail::fmt17(r.diagnostics.snapshot_tv[k]);
    s += "\n";
  }
  return s;
}

/// Writes trajectory.csv, density.csv, diagnostics.csv and result.json
/// (scenario + record in one document) into `dir`.
inline void write_record(const RunRecord& r, const Scenario& s, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  detail::write_text_file(dir / "trajectory.csv", trajectory_csv(r));
  detail::write_text_file(dir / "density.csv", density_csv(r));
  detail::write_text_file(dir / "diagnostics.csv", diagnostics_csv(r));
  nlohmann::ordered_json doc;
  doc["scenario"] = scenario_to_json(s);
  doc["record"] = record_to_json(r);
  detail::write_text_file(dir / "result.json", doc.dump(2) + "\n");
}

}  // namespace mbt
