#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "febe/bem.hpp"
#include "febe/material.hpp"
#include "febe/vi.hpp"

namespace febe {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : std::runtime_error(key + ": " + what), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Flat `key = value` text with `#` comments.
class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  const std::map<std::string, std::string>& values() const { return values_; }
  std::string dump() const;

 private:
  std::map<std::string, std::string> values_;
};

struct RunConfig {
  std::string problem = "scalar";  // scalar | vector
  std::string preset = "smooth";
  std::string mesh_path;
  int mesh_refine = 0;
  double capacity_target = 0.8;

  double p = 2.0;
  LawKind law = LawKind::kPLaplace;
  double delta = 0.0;
  ExteriorCoefficients exterior{1.0, 1.0, true};
  double friction_scale = 1.0;
  double f_offset = 0.0;   // constant added to every component of f
  double t0_offset = 0.0;  // constant added to every component of t0

  int fem_quad_order = 4;
  BemOptions bem;
  SolverOptions solver;
  Formulation formulation = Formulation::kSteklov;
  bool stabilized = true;

  std::string estimator = "auto";  // auto | sp | lp | recovery
  double estimate_delta = 0.0;

  std::string mode = "adaptive";  // uniform | adaptive
  int levels = 4;
  double theta = 0.5;
  long max_dofs = 20000;
  double target_eta = 0.0;
  int uniform_bisections = 2;

  std::string output = "out";
  unsigned seed = 0;
  Config raw;

  int components() const { return problem == "vector" ? 2 : 1; }
  MaterialLaw material() const;
};

/// Validates and converts; errors name the offending key.
RunConfig parse_run_config(const Config& config);
std::vector<std::string> known_config_keys();

}  // namespace febe
