#include "febe/config.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "febe/presets.hpp"

namespace febe {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + v + "'");
  }
}

long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected an integer, got '" + v + "'");
  }
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key, what);
}

std::string one_of(const Config& c, const std::string& key, const std::string& fallback,
                   const std::vector<std::string>& allowed) {
  const std::string v = c.get(key, fallback);
  if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : "|") + a;
    throw ConfigError(key, "unknown value '" + v + "', expected " + list);
  }
  return v;
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno), "expected `key = value`");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno), "empty key");
    c.values_[key] = trim(line.substr(eq + 1));
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config", "cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? to_double(key, values_.at(key)) : fallback;
}

long Config::get_int(const std::string& key, long fallback) const {
  return has(key) ? to_int(key, values_.at(key)) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = values_.at(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key, "expected true or false, got '" + v + "'");
}

std::string Config::dump() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

std::vector<std::string> known_config_keys() {
  return {"problem.type",       "problem.preset",     "mesh.path",         "mesh.refine",
          "mesh.capacity",      "material.p",         "material.kind",      "material.delta",
          "exterior.mu",        "exterior.lambda",    "friction.scale",    "fem.quad_order",
          "bem.quad_order",     "bem.half_factor",    "solver.tol",        "solver.gamma_start",
          "solver.gamma_min",   "solver.max_iter",    "solver.formulation", "solver.stabilized",
          "solver.compat",      "solver.polish",      "estimate.kind",     "estimate.delta",
          "adapt.mode",         "adapt.levels",       "adapt.theta",       "adapt.max_dofs",
          "adapt.target_eta",   "adapt.uniform_bisections", "output.dir",  "seed",
          "data.f_offset",      "data.t0_offset"};
}

MaterialLaw RunConfig::material() const {
  return MaterialLaw(p, law, delta, components() == 2 ? LawMode::kMatrix : LawMode::kVector);
}

RunConfig parse_run_config(const Config& c) {
  const auto known = known_config_keys();
  for (const auto& [k, v] : c.values())
    if (std::find(known.begin(), known.end(), k) == known.end()) throw ConfigError(k, "unknown key");

  RunConfig r;
  r.raw = c;
  r.problem = one_of(c, "problem.type", "scalar", {"scalar", "vector"});
  r.preset = one_of(c, "problem.preset", r.problem == "vector" ? "vector_smooth" : "smooth", preset_names());
  require(preset_components(r.preset) == r.components(), "problem.preset",
          "preset '" + r.preset + "' does not match problem.type = " + r.problem);
  r.mesh_path = c.get("mesh.path", "");
  require(r.mesh_path.empty() || std::filesystem::exists(r.mesh_path), "mesh.path",
          "file not found: " + r.mesh_path);
  r.mesh_refine = static_cast<int>(c.get_int("mesh.refine", 0));
  require(r.mesh_refine >= 0, "mesh.refine", "must be >= 0");
  r.capacity_target = c.get_double("mesh.capacity", 0.8);
  require(r.capacity_target > 0.0 && r.capacity_target < 1.0, "mesh.capacity", "must lie in (0, 1)");

  r.p = c.get_double("material.p", 2.0);
  require(r.p > 1.0, "material.p", "must be > 1, got " + c.get("material.p", ""));
  try {
    r.law = parse_law_kind(c.get("material.kind", "plaplace"));
  } catch (const std::exception& e) {
    throw ConfigError("material.kind", e.what());
  }
  r.delta = c.get_double("material.delta", 0.0);
  require(r.delta >= 0.0 && r.delta <= 1.0, "material.delta", "must lie in [0, 1]");
  r.exterior = {c.get_double("exterior.mu", 1.0), c.get_double("exterior.lambda", 1.0), r.components() == 1};
  try {
    r.exterior.validate();
  } catch (const std::exception& e) {
    throw ConfigError("exterior.mu", e.what());
  }
  r.friction_scale = c.get_double("friction.scale", 1.0);
  require(r.friction_scale >= 0.0, "friction.scale", "must be >= 0");

  r.f_offset = c.get_double("data.f_offset", 0.0);
  r.t0_offset = c.get_double("data.t0_offset", 0.0);

  r.fem_quad_order = static_cast<int>(c.get_int("fem.quad_order", 4));
  require(r.fem_quad_order >= 2 && r.fem_quad_order <= 6, "fem.quad_order", "must lie in [2, 6]");
  r.bem.quad_order = static_cast<int>(c.get_int("bem.quad_order", 8));
  require(r.bem.quad_order >= 2 && r.bem.quad_order <= 40, "bem.quad_order", "must lie in [2, 40]");
  r.bem.half_factor = c.get_bool("bem.half_factor", false);

  r.solver.tol = c.get_double("solver.tol", -1.0);
  r.solver.gamma_start = c.get_double("solver.gamma_start", 1e-2);
  r.solver.gamma_min = c.get_double("solver.gamma_min", 1e-8);
  require(r.solver.gamma_min > 0.0 && r.solver.gamma_min <= r.solver.gamma_start, "solver.gamma_min",
          "must lie in (0, solver.gamma_start]");
  r.solver.max_iter = static_cast<int>(c.get_int("solver.max_iter", 200));
  require(r.solver.max_iter > 0, "solver.max_iter", "must be > 0");
  r.solver.quad_order = r.fem_quad_order;
  r.solver.polish = c.get_bool("solver.polish", true);
  const std::string compat = one_of(c, "solver.compat", "rigid", {"rigid", "single", "none"});
  r.solver.compat = compat == "rigid" ? CompatMode::kRigid : compat == "single" ? CompatMode::kSingle : CompatMode::kNone;
  r.formulation = one_of(c, "solver.formulation", "steklov", {"steklov", "layerpotential"}) == "steklov"
                      ? Formulation::kSteklov
                      : Formulation::kLayerPotential;
  r.stabilized = c.get_bool("solver.stabilized", true);

  r.estimator = one_of(c, "estimate.kind", "auto", {"auto", "sp", "lp", "recovery"});
  r.estimate_delta = c.get_double("estimate.delta", 0.0);
  require(r.estimate_delta >= 0.0, "estimate.delta", "must be >= 0");
  if (r.estimator == "recovery") {
    require(r.components() == 1, "estimate.kind", "recovery estimator needs problem.type = scalar");
    require(r.p >= 2.0, "estimate.kind", "recovery estimator needs material.p >= 2");
  }

  r.mode = one_of(c, "adapt.mode", "adaptive", {"uniform", "adaptive"});
  r.levels = static_cast<int>(c.get_int("adapt.levels", 4));
  require(r.levels >= 1, "adapt.levels", "must be >= 1");
  r.theta = c.get_double("adapt.theta", 0.5);
  require(r.theta > 0.0 && r.theta <= 1.0, "adapt.theta", "must lie in (0, 1]");
  r.max_dofs = c.get_int("adapt.max_dofs", 20000);
  require(r.max_dofs >= 0, "adapt.max_dofs", "must be >= 0");
  r.target_eta = c.get_double("adapt.target_eta", 0.0);
  r.uniform_bisections = static_cast<int>(c.get_int("adapt.uniform_bisections", 2));
  require(r.uniform_bisections >= 1, "adapt.uniform_bisections", "must be >= 1");

  r.output = c.get("output.dir", "out");
  r.seed = static_cast<unsigned>(c.get_int("seed", 0));
  return r;
}

}  // namespace febe
