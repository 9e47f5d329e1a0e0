#include "sird/workbench/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sird/errors.hpp"

namespace sird::workbench {
namespace {

using nlohmann::json;

void allow_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
T get(const json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

template <class T>
void read_opt(const json& j, const std::string& key, T& out, const std::string& where) {
  if (j.contains(key)) out = get<T>(j, key, where);
}

Vec3 vec3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(where + ": expected three numbers");
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[static_cast<std::size_t>(i)].is_number()) throw ConfigError(where + ": expected numbers");
    v[i] = j[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

json vec3_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

int param_index(const std::string& name) {
  for (int i = 0; i < 3; ++i) {
    if (name == param_name(i)) return i;
  }
  throw ConfigError("unknown parameter '" + name + "' (expected beta, gamma or m)");
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

ObjectiveForm parse_form(const std::string& s) {
  const std::string f = lower(s);
  if (f == "r1") return ObjectiveForm::R1;
  if (f == "r2") return ObjectiveForm::R2;
  if (f == "r3") return ObjectiveForm::R3;
  if (f == "data_driven" || f == "datadriven") return ObjectiveForm::DataDriven;
  throw ConfigError("unknown objective form '" + s + "'");
}

const char* form_name(ObjectiveForm f) {
  switch (f) {
    case ObjectiveForm::R1: return "R1";
    case ObjectiveForm::R2: return "R2";
    case ObjectiveForm::R3: return "R3";
    case ObjectiveForm::DataDriven: return "data_driven";
  }
  return "R1";
}

ode::Tolerances tolerances(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(where + ": expected [rtol, atol]");
  return {j[0].get<double>(), j[1].get<double>()};
}

void read_stop(const json& j, optim::StoppingConfig& s, const std::string& where) {
  allow_keys(j, {"it_max", "tol_a", "tol_b", "tol_pg"}, where);
  read_opt(j, "it_max", s.it_max, where);
  read_opt(j, "tol_a", s.tol_a, where);
  read_opt(j, "tol_b", s.tol_b, where);
  read_opt(j, "tol_pg", s.tol_pg, where);
}

json stop_json(const optim::StoppingConfig& s) {
  return {{"it_max", s.it_max}, {"tol_a", s.tol_a}, {"tol_b", s.tol_b}, {"tol_pg", s.tol_pg}};
}

optim::OptimizerConfig optimizer_from(const json& j, const optim::StoppingConfig& defaults) {
  optim::OptimizerConfig c;
  c.stop = defaults;
  if (j.is_string()) {
    c.algorithm = optim::parse_algorithm(j.get<std::string>());
    return c;
  }
  const std::string w = "optimizer";
  allow_keys(j, {"algorithm", "stop", "box_scaling", "pgd", "fista", "nmapg", "lmbfgs"}, w);
  c.algorithm = optim::parse_algorithm(get<std::string>(j, "algorithm", w));
  if (j.contains("stop")) read_stop(j["stop"], c.stop, w + ".stop");
  read_opt(j, "box_scaling", c.box_scaling, w);
  if (j.contains("pgd")) {
    const auto& p = j["pgd"];
    allow_keys(p, {"sigma", "shrink", "initial_step", "grow", "max_backtracks"}, w + ".pgd");
    read_opt(p, "sigma", c.pgd.sigma, w);
    read_opt(p, "shrink", c.pgd.shrink, w);
    read_opt(p, "initial_step", c.pgd.initial_step, w);
    read_opt(p, "grow", c.pgd.grow, w);
    read_opt(p, "max_backtracks", c.pgd.max_backtracks, w);
  }
  if (j.contains("fista")) {
    const auto& p = j["fista"];
    allow_keys(p, {"L0", "eta", "nu", "max_backtracks"}, w + ".fista");
    read_opt(p, "L0", c.fista.L0, w);
    read_opt(p, "eta", c.fista.eta, w);
    read_opt(p, "nu", c.fista.nu, w);
    read_opt(p, "max_backtracks", c.fista.max_backtracks, w);
  }
  if (j.contains("nmapg")) {
    const auto& p = j["nmapg"];
    allow_keys(p, {"mu", "delta", "eta", "l_min", "l_max", "max_backtracks"}, w + ".nmapg");
    read_opt(p, "mu", c.nmapg.mu, w);
    read_opt(p, "delta", c.nmapg.delta, w);
    read_opt(p, "eta", c.nmapg.eta, w);
    read_opt(p, "l_min", c.nmapg.l_min, w);
    read_opt(p, "l_max", c.nmapg.l_max, w);
    read_opt(p, "max_backtracks", c.nmapg.max_backtracks, w);
  }
  if (j.contains("lmbfgs")) {
    const auto& p = j["lmbfgs"];
    auto& l = c.lmbfgs;
    allow_keys(p,
               {"memory", "theta_bar", "psi", "c", "zeta", "nu_dec", "nu_inc", "tau_accept",
                "tau_increase", "sigma", "omega", "delta0", "delta_min", "delta_max",
                "curvature_eps", "blend_tol", "restarts"},
               w + ".lmbfgs");
    read_opt(p, "memory", l.memory, w);
    read_opt(p, "theta_bar", l.theta_bar, w);
    read_opt(p, "psi", l.psi, w);
    read_opt(p, "c", l.c, w);
    read_opt(p, "zeta", l.zeta, w);
    read_opt(p, "nu_dec", l.nu_dec, w);
    read_opt(p, "nu_inc", l.nu_inc, w);
    read_opt(p, "tau_accept", l.tau_accept, w);
    read_opt(p, "tau_increase", l.tau_increase, w);
    read_opt(p, "sigma", l.sigma, w);
    read_opt(p, "omega", l.omega, w);
    read_opt(p, "delta0", l.delta0, w);
    read_opt(p, "delta_min", l.delta_min, w);
    read_opt(p, "delta_max", l.delta_max, w);
    read_opt(p, "curvature_eps", l.curvature_eps, w);
    read_opt(p, "blend_tol", l.blend_tol, w);
    read_opt(p, "restarts", l.restarts, w);
  }
  c.validate();
  return c;
}

json optimizer_json(const optim::OptimizerConfig& c) {
  const auto& l = c.lmbfgs;
  return {
      {"algorithm", optim::to_string(c.algorithm)},
      {"stop", stop_json(c.stop)},
      {"box_scaling", c.box_scaling},
      {"pgd",
       {{"sigma", c.pgd.sigma},
        {"shrink", c.pgd.shrink},
        {"initial_step", c.pgd.initial_step},
        {"grow", c.pgd.grow},
        {"max_backtracks", c.pgd.max_backtracks}}},
      {"fista",
       {{"L0", c.fista.L0},
        {"eta", c.fista.eta},
        {"nu", c.fista.nu},
        {"max_backtracks", c.fista.max_backtracks}}},
      {"nmapg",
       {{"mu", c.nmapg.mu},
        {"delta", c.nmapg.delta},
        {"eta", c.nmapg.eta},
        {"l_min", c.nmapg.l_min},
        {"l_max", c.nmapg.l_max},
        {"max_backtracks", c.nmapg.max_backtracks}}},
      {"lmbfgs",
       {{"memory", l.memory},
        {"theta_bar", l.theta_bar},
        {"psi", l.psi},
        {"c", l.c},
        {"zeta", l.zeta},
        {"nu_dec", l.nu_dec},
        {"nu_inc", l.nu_inc},
        {"tau_accept", l.tau_accept},
        {"tau_increase", l.tau_increase},
        {"sigma", l.sigma},
        {"omega", l.omega},
        {"delta0", l.delta0},
        {"delta_min", l.delta_min},
        {"delta_max", l.delta_max},
        {"curvature_eps", l.curvature_eps},
        {"blend_tol", l.blend_tol},
        {"restarts", l.restarts}}},
  };
}

const char* target_kind_name(TargetKind k) {
  switch (k) {
    case TargetKind::Known: return "known";
    case TargetKind::Noisy: return "noisy";
    case TargetKind::Csv: return "csv";
    case TargetKind::Zero: return "zero";
  }
  return "known";
}

ExperimentConfig from_json(const json& j, const std::filesystem::path& base) {
  ExperimentConfig c;
  allow_keys(j,
             {"name", "rho0", "population", "horizon", "grid", "parameters", "objective", "solver",
              "target", "stopping", "optimizers", "output", "seed"},
             "config");
  read_opt(j, "name", c.name, "config");
  if (j.contains("rho0")) c.rho0 = vec3(j["rho0"], "rho0");
  if (j.contains("population")) c.population = get<double>(j, "population", "config");
  read_opt(j, "horizon", c.horizon, "config");
  read_opt(j, "seed", c.seed, "config");
  if (j.contains("output")) c.output_dir = get<std::string>(j, "output", "config");

  if (j.contains("grid")) {
    const auto& g = j["grid"];
    allow_keys(g, {"interior", "kind"}, "grid");
    read_opt(g, "interior", c.grid_interior, "grid");
    if (g.contains("kind")) {
      const std::string k = lower(get<std::string>(g, "kind", "grid"));
      if (k != "chebyshev" && k != "uniform") throw ConfigError("grid.kind must be chebyshev or uniform");
      c.uniform_grid = k == "uniform";
    }
  }

  if (j.contains("parameters")) {
    const auto& p = j["parameters"];
    allow_keys(p, {"time_dependent", "initial", "fixed", "bounds"}, "parameters");
    read_opt(p, "time_dependent", c.parameters.time_dependent, "parameters");
    if (p.contains("initial")) c.parameters.initial = vec3(p["initial"], "parameters.initial");
    if (p.contains("fixed")) {
      for (const auto& name : p["fixed"]) {
        c.parameters.fixed[static_cast<std::size_t>(param_index(name.get<std::string>()))] = true;
      }
    }
    if (p.contains("bounds")) {
      for (const auto& [name, b] : p["bounds"].items()) {
        if (!b.is_array() || b.size() != 2) throw ConfigError("bounds." + name + ": expected [lo, hi]");
        c.parameters.bounds[static_cast<std::size_t>(param_index(name))] = {b[0].get<double>(),
                                                                             b[1].get<double>()};
      }
    }
  }

  if (j.contains("objective")) {
    const auto& o = j["objective"];
    const std::string w = "objective";
    allow_keys(o,
               {"form", "theta", "vartheta", "reg_weights", "terminal_weights", "penalty", "scale",
                "reg_weights_per_n2"},
               w);
    auto& s = c.objective.spec;
    s.form = parse_form(o.value("form", std::string("R1")));
    if (o.contains("theta")) s.reg_weights = Vec3::Constant(get<double>(o, "theta", w));
    if (o.contains("vartheta")) s.terminal_weights = Vec3::Constant(get<double>(o, "vartheta", w));
    if (o.contains("reg_weights")) s.reg_weights = vec3(o["reg_weights"], w + ".reg_weights");
    if (o.contains("terminal_weights")) {
      s.terminal_weights = vec3(o["terminal_weights"], w + ".terminal_weights");
    }
    read_opt(o, "penalty", s.penalty, w);
    read_opt(o, "reg_weights_per_n2", c.objective.reg_per_population_squared, w);
    if (o.contains("scale")) {
      if (o["scale"].is_string()) {
        if (o["scale"].get<std::string>() != "n^2") throw ConfigError("objective.scale: number or \"n^2\"");
        c.objective.scale_by_population_squared = true;
      } else {
        s.scale = get<double>(o, "scale", w);
      }
    }
  }

  if (j.contains("solver")) {
    const auto& s = j["solver"];
    allow_keys(s, {"state_tol", "adjoint_tol", "invariant_tol"}, "solver");
    if (s.contains("state_tol")) c.solver.state_tol = tolerances(s["state_tol"], "solver.state_tol");
    if (s.contains("adjoint_tol")) c.solver.adjoint_tol = tolerances(s["adjoint_tol"], "solver.adjoint_tol");
    read_opt(s, "invariant_tol", c.solver.invariant_tol, "solver");
  }

  if (j.contains("target")) {
    const auto& t = j["target"];
    const std::string w = "target";
    allow_keys(t,
               {"source", "alpha", "cells", "path", "time_scale", "population_scale",
                "interpolation", "columns"},
               w);
    const std::string src = lower(get<std::string>(t, "source", w));
    if (src == "known") {
      c.target.kind = TargetKind::Known;
    } else if (src == "noisy") {
      c.target.kind = TargetKind::Noisy;
    } else if (src == "csv") {
      c.target.kind = TargetKind::Csv;
    } else if (src == "zero") {
      c.target.kind = TargetKind::Zero;
    } else {
      throw ConfigError("target.source must be known, noisy, csv or zero");
    }
    if (t.contains("alpha")) c.target.alpha_star = vec3(t["alpha"], w + ".alpha");
    read_opt(t, "cells", c.target.cells, w);
    if (t.contains("path")) {
      std::filesystem::path p = get<std::string>(t, "path", w);
      c.target.path = (p.is_relative() && !base.empty()) ? base / p : p;
    }
    read_opt(t, "time_scale", c.target.time_scale, w);
    read_opt(t, "population_scale", c.target.population_scale, w);
    read_opt(t, "interpolation", c.target.interpolation, w);
    if (t.contains("columns")) {
      const auto& cols = t["columns"];
      if (!cols.is_array() || cols.size() != 4) throw ConfigError("target.columns: expected four names");
      for (std::size_t i = 0; i < 4; ++i) c.target.columns[i] = cols[i].get<std::string>();
    }
  }

  optim::StoppingConfig stop_defaults;
  if (j.contains("stopping")) read_stop(j["stopping"], stop_defaults, "stopping");
  if (j.contains("optimizers")) {
    if (!j["optimizers"].is_array()) throw ConfigError("optimizers: expected a list");
    for (const auto& o : j["optimizers"]) c.optimizers.push_back(optimizer_from(o, stop_defaults));
  }
  c.validate();
  return c;
}

json to_json(const ExperimentConfig& c) {
  json params = {{"time_dependent", c.parameters.time_dependent},
                 {"initial", vec3_json(c.parameters.initial)}};
  json fixed = json::array();
  json bounds = json::object();
  for (int i = 0; i < 3; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (c.parameters.fixed[k]) fixed.push_back(param_name(i));
    bounds[param_name(i)] = {c.parameters.bounds[k].lo, c.parameters.bounds[k].hi};
  }
  params["fixed"] = fixed;
  params["bounds"] = bounds;

  const auto& s = c.objective.spec;
  json objective = {{"form", form_name(s.form)},
                    {"reg_weights", vec3_json(s.reg_weights)},
                    {"terminal_weights", vec3_json(s.terminal_weights)},
                    {"penalty", s.penalty},
                    {"reg_weights_per_n2", c.objective.reg_per_population_squared}};
  if (c.objective.scale_by_population_squared) {
    objective["scale"] = "n^2";
  } else {
    objective["scale"] = s.scale;
  }

  json target = {{"source", target_kind_name(c.target.kind)},
                 {"alpha", vec3_json(c.target.alpha_star)},
                 {"cells", c.target.cells}};
  if (c.target.kind == TargetKind::Csv) {
    target["path"] = c.target.path.string();
    target["time_scale"] = c.target.time_scale;
    target["population_scale"] = c.target.population_scale;
    target["interpolation"] = c.target.interpolation;
    target["columns"] = c.target.columns;
  }

  json optimizers = json::array();
  for (const auto& o : c.optimizers) optimizers.push_back(optimizer_json(o));

  json out = {
      {"name", c.name},
      {"rho0", vec3_json(c.rho0)},
      {"horizon", c.horizon},
      {"grid", {{"interior", c.grid_interior}, {"kind", c.uniform_grid ? "uniform" : "chebyshev"}}},
      {"parameters", params},
      {"objective", objective},
      {"solver",
       {{"state_tol", {c.solver.state_tol.rel, c.solver.state_tol.abs}},
        {"adjoint_tol", {c.solver.adjoint_tol.rel, c.solver.adjoint_tol.abs}},
        {"invariant_tol", c.solver.invariant_tol}}},
      {"target", target},
      {"optimizers", optimizers},
      {"output", c.output_dir.string()},
      {"seed", c.seed},
  };
  if (c.population) out["population"] = *c.population;
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (target.kind != TargetKind::Csv) {
    if (!rho0.allFinite() || rho0.minCoeff() < 0.0 || rho0.sum() <= 0.0) {
      throw ConfigError("rho0 must be non-negative with a positive total");
    }
    if (population && std::abs(*population - rho0.sum()) > 1e-9 * std::max(1.0, *population)) {
      throw ConfigError("population must equal the sum of rho0");
    }
    if (!(std::isfinite(horizon) && horizon > 0.0)) throw ConfigError("horizon must be positive");
  }
  if (grid_interior < 2) throw ConfigError("grid needs at least two interior nodes");
  for (int i = 0; i < 3; ++i) {
    const auto& b = parameters.bounds[static_cast<std::size_t>(i)];
    if (!(b.lo >= 0.0 && b.lo < b.hi)) throw ConfigError(std::string("bounds of ") + param_name(i) + " must satisfy 0 <= lo < hi");
    const double v = parameters.initial[i];
    if (!parameters.fixed[static_cast<std::size_t>(i)] && (v < b.lo || v > b.hi)) {
      throw ConfigError(std::string("initial ") + param_name(i) + " lies outside its bounds");
    }
  }
  objective.spec.validate();
  if (target.kind == TargetKind::Noisy && target.cells < 1) throw ConfigError("target.cells must be >= 1");
  if (target.kind == TargetKind::Csv) {
    if (target.path.empty()) throw ConfigError("csv target needs a path");
    if (!(target.time_scale > 0.0) || !(target.population_scale > 0.0)) {
      throw ConfigError("csv scalings must be positive");
    }
    if (target.interpolation != "linear" && target.interpolation != "hermite") {
      throw ConfigError("target.interpolation must be linear or hermite");
    }
  }
  for (const auto& o : optimizers) o.validate();
}

ExperimentConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return from_json(j, base_dir);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

std::string dump_config(const ExperimentConfig& cfg) { return to_json(cfg).dump(2); }

optim::OptimizerConfig parse_optimizer(const std::string& json_text) {
  try {
    return optimizer_from(json::parse(json_text), {});
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("optimizer is not valid JSON: ") + e.what());
  }
}

}  // namespace sird::workbench
