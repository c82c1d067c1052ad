#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mbt/model.hpp"
#include "mbt/piecewise.hpp"

namespace mbt {

enum class ModelVariant { Single, MultiA, MultiB };

inline const char* to_string(ModelVariant m) {
  switch (m) {
    case ModelVariant::Single: return "single";
    case ModelVariant::MultiA: return "multi_a";
    case ModelVariant::MultiB: return "multi_b";
  }
  return "single";
}

struct BottleneckSpec {
  double position{0.0};
  BottleneckParams params{};
};

struct Numerics {
  double dx{0.02};
  std::optional<double> dt{};  // absent: derive from the CFL bound
  double safety{1.0};
  int nu{6};
  int output_stride{1};
};

/// A complete experiment description: domain, horizon, initial datum, model
/// variant, vehicles and numerical parameters.
struct Scenario {
  std::string name;
  double x_lo{0.0}, x_hi{1.0};
  double horizon{1.0};
  PiecewiseConstant initial_density{};
  ModelVariant model{ModelVariant::Single};
  std::vector<BottleneckSpec> bottlenecks;
  Numerics numerics{};

  void validate() const {
    if (!(x_lo < x_hi)) throw ConfigError("scenario.domain: need x_lo < x_hi");
    if (!(horizon >= 0.0)) throw ConfigError("scenario.horizon: must be nonnegative");
    if (initial_density.values.size() != initial_density.breakpoints.size() + 1)
      throw ConfigError("scenario.initial_density: need one more value than breakpoints");
    for (std::size_t k = 0; k < initial_density.values.size(); ++k)
      if (!(initial_density.values[k] >= 0.0 && initial_density.values[k] <= 1.0))
        throw ConfigError("scenario.initial_density.values[" + std::to_string(k) + "]: density " +
                          std::to_string(initial_density.values[k]) + " outside [0,1]");
    if (bottlenecks.empty()) throw ConfigError("scenario.bottlenecks: need at least one vehicle");
    if (model == ModelVariant::Single && bottlenecks.size() != 1)
      throw ConfigError("scenario.model: single-vehicle model requires exactly one bottleneck");
    for (std::size_t i = 0; i < bottlenecks.size(); ++i) {
      try {
        bottlenecks[i].params.validate();
      } catch (const ConfigError& e) {
        throw ConfigError("scenario.bottlenecks[" + std::to_string(i) + "]: " + e.what());
      }
      if (!(bottlenecks[i].position >= x_lo && bottlenecks[i].position <= x_hi))
        throw ConfigError("scenario.bottlenecks[" + std::to_string(i) + "].position: outside the domain");
    }
    if (model == ModelVariant::MultiB) {
      for (std::size_t i = 0; i + 1 < bottlenecks.size(); ++i) {
        double gap = bottlenecks[i + 1].position - bottlenecks[i].position;
        double need = bottlenecks[i + 1].params.phi.beta + bottlenecks[i].params.phi.beta;
        // A follower may start exactly at the minimum distance (it is then
        // clamped to its leader from the first step), but never closer.
        if (gap < need - 1e-12)
          throw ConfigError("scenario.bottlenecks[" + std::to_string(i) +
                            "]: ordering gap " + std::to_string(gap) + " below beta sum " + std::to_string(need));
      }
    }
    if (!(numerics.dx > 0.0)) throw ConfigError("scenario.numerics.dx: must be positive");
    if (numerics.dt && !(*numerics.dt > 0.0)) throw ConfigError("scenario.numerics.dt: must be positive");
    if (!(numerics.safety > 0.0 && numerics.safety <= 1.0))
      throw ConfigError("scenario.numerics.safety: must lie in (0, 1]");
    if (numerics.nu < 1) throw ConfigError("scenario.numerics.nu: must be >= 1");
    if (numerics.output_stride < 1) throw ConfigError("scenario.numerics.output_stride: must be >= 1");
  }
};

namespace detail {

inline const nlohmann::ordered_json& jfield(const nlohmann::ordered_json& j, const char* key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(path + "." + key + ": missing field");
  return *it;
}

inline double jnumber(const nlohmann::ordered_json& j, const char* key, const std::string& path) {
  const auto& f = jfield(j, key, path);
  if (!f.is_number()) throw ConfigError(path + "." + key + ": expected a number");
  return f.get<double>();
}

inline nlohmann::ordered_json phi_to_json(const PhiProfile& p) {
  nlohmann::ordered_json j;
  j["shape"] = p.shape == PhiShape::PaperBump ? "paper_bump" : "custom";
  j["v_bar"] = p.v_bar;
  j["v_under"] = p.v_under;
  j["beta"] = p.beta;
  if (p.shape == PhiShape::Custom) j["samples"] = p.samples;
  return j;
}

inline PhiProfile phi_from_json(const nlohmann::ordered_json& j, const std::string& path) {
  PhiProfile p;
  std::string shape = jfield(j, "shape", path).get<std::string>();
  if (shape == "paper_bump")
    p.shape = PhiShape::PaperBump;
  else if (shape == "custom")
    p.shape = PhiShape::Custom;
  else
    throw ConfigError(path + ".shape: unknown shape '" + shape + "'");
  p.v_bar = jnumber(j, "v_bar", path);
  p.v_under = jnumber(j, "v_under", path);
  p.beta = jnumber(j, "beta", path);
  if (p.shape == PhiShape::Custom) p.samples = jfield(j, "samples", path).get<std::vector<double>>();
  return p;
}

}  // namespace detail

inline nlohmann::ordered_json scenario_to_json(const Scenario& s) {
  nlohmann::ordered_json j;
  j["name"] = s.name;
  j["domain"] = {s.x_lo, s.x_hi};
  j["horizon"] = s.horizon;
  j["initial_density"] = {{"breakpoints", s.initial_density.breakpoints}, {"values", s.initial_density.values}};
  j["model"] = to_string(s.model);
  auto& arr = j["bottlenecks"] = nlohmann::ordered_json::array();
  for (const auto& b : s.bottlenecks) {
    nlohmann::ordered_json jb;
    jb["position"] = b.position;
    jb["w_max"] = b.params.w_max;
    jb["phi"] = detail::phi_to_json(b.params.phi);
    arr.push_back(std::move(jb));
  }
  nlohmann::ordered_json jn;
  jn["dx"] = s.numerics.dx;
  if (s.numerics.dt) jn["dt"] = *s.numerics.dt;
  jn["safety"] = s.numerics.safety;
  jn["nu"] = s.numerics.nu;
  jn["output_stride"] = s.numerics.output_stride;
  j["numerics"] = std::move(jn);
  return j;
}

inline Scenario scenario_from_json(const nlohmann::ordered_json& j) {
  using detail::jfield;
  using detail::jnumber;
  const std::string path = "scenario";
  Scenario s;
  s.name = jfield(j, "name", path).get<std::string>();
  const auto& dom = jfield(j, "domain", path);
  if (!dom.is_array() || dom.size() != 2) throw ConfigError("scenario.domain: expected [x_lo, x_hi]");
  s.x_lo = dom[0].get<double>();
  s.x_hi = dom[1].get<double>();
  s.horizon = jnumber(j, "horizon", path);
  const auto& init = jfield(j, "initial_density", path);
  std::vector<double> bps = jfield(init, "breakpoints", path + ".initial_density").get<std::vector<double>>();
  std::vector<double> vals = jfield(init, "values", path + ".initial_density").get<std::vector<double>>();
  if (vals.size() != bps.size() + 1)
    throw ConfigError("scenario.initial_density: need one more value than breakpoints");
  s.initial_density = PiecewiseConstant(std::move(bps), std::move(vals));
  std::string model = jfield(j, "model", path).get<std::string>();
  if (model == "single")
    s.model = ModelVariant::Single;
  else if (model == "multi_a")
    s.model = ModelVariant::MultiA;
  else if (model == "multi_b")
    s.model = ModelVariant::MultiB;
  else
    throw ConfigError("scenario.model: unknown model '" + model + "'");
  for (std::size_t i = 0; i < jfield(j, "bottlenecks", path).size(); ++i) {
    const auto& jb = j["bottlenecks"][i];
    std::string bpath = "scenario.bottlenecks[" + std::to_string(i) + "]";
    BottleneckSpec b;
    b.position = jnumber(jb, "position", bpath);
    b.params.w_max = jnumber(jb, "w_max", bpath);
    b.params.phi = detail::phi_from_json(jfield(jb, "phi", bpath), bpath + ".phi");
    s.bottlenecks.push_back(std::move(b));
  }
  if (j.contains("numerics")) {
    const auto& jn = j["numerics"];
    std::string npath = "scenario.numerics";
    if (jn.contains("dx")) s.numerics.dx = jnumber(jn, "dx", npath);
    if (jn.contains("dt")) s.numerics.dt = jnumber(jn, "dt", npath);
    if (jn.contains("safety")) s.numerics.safety = jnumber(jn, "safety", npath);
    if (jn.contains("nu")) s.numerics.nu = jfield(jn, "nu", npath).get<int>();
    if (jn.contains("output_stride")) s.numerics.output_stride = jfield(jn, "output_stride", npath).get<int>();
  }
  s.validate();
  return s;
}

inline std::string serialize_scenario(const Scenario& s) { return scenario_to_json(s).dump(2) + "\n"; }

inline Scenario parse_scenario(const std::string& text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("scenario: invalid JSON: ") + e.what());
  }
  return scenario_from_json(j);
}

/// The experiment library. Domains and horizons are sized from the plots
/// these runs reproduce; everything else is the quoted parameter set.
inline Scenario builtin_scenario(const std::string& name) {
  auto phi_small = PhiProfile::bump(1.0, 0.6, 0.1);
  auto phi_big = PhiProfile::bump(1.0, 0.5, 0.25);
  Scenario s;
  s.name = name;
  s.numerics.dx = 0.02;
  s.numerics.dt = 0.01;
  s.numerics.nu = 8;
  s.numerics.output_stride = 10;
  if (name == "fig5") {
    s.x_lo = 0.0; s.x_hi = 3.0; s.horizon = 3.0;
    s.initial_density = PiecewiseConstant({1.4}, {0.9, 0.45});
    s.model = ModelVariant::Single;
    s.bottlenecks = {{0.5, {0.4, phi_small}}};
  } else if (name == "fig6") {
    s.x_lo = 0.0; s.x_hi = 3.0; s.horizon = 2.5;
    s.initial_density = PiecewiseConstant({1.4}, {0.3, 0.9});
    s.model = ModelVariant::Single;
    s.bottlenecks = {{0.5, {0.4, phi_small}}};
  } else if (name == "fig7") {
    s.x_lo = 0.0; s.x_hi = 3.0; s.horizon = 3.0;
    s.initial_density = PiecewiseConstant({0.6, 1.6}, {0.9, 0.25, 0.9});
    s.model = ModelVariant::Single;
    s.bottlenecks = {{0.5, {0.4, phi_small}}};
  } else if (name == "fig8") {
    s.x_lo = 0.0; s.x_hi = 5.0; s.horizon = 5.0;
    s.initial_density = PiecewiseConstant({2.5}, {0.9, 0.1});
    s.model = ModelVariant::MultiB;
    s.bottlenecks = {{1.0, {0.49, phi_big}}, {1.5, {0.4, phi_big}}, {2.0, {0.4, phi_big}}};
  } else if (name == "fig9") {
    s.x_lo = 0.0; s.x_hi = 6.0; s.horizon = 5.0;
    s.initial_density = PiecewiseConstant({3.5}, {0.85, 0.95});
    s.model = ModelVariant::MultiB;
    s.bottlenecks = {{1.0, {0.49, phi_big}}, {2.0, {0.4, phi_big}}, {3.0, {0.4, phi_big}}};
  } else {
    throw ConfigError("builtin_scenario: unknown name '" + name + "'");
  }
  s.validate();
  return s;
}

inline std::vector<std::string> builtin_names() { return {"fig5", "fig6", "fig7", "fig8", "fig9"}; }

}  // namespace mbt
