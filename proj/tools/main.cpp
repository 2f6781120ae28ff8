#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "febe/adapt.hpp"
#include "febe/config.hpp"
#include "febe/export.hpp"
#include "febe/oracle.hpp"
#include "febe/study.hpp"

namespace fs = std::filesystem;
using namespace febe;

namespace {

struct Common {
  std::string config_path;
  std::string mesh_path;
  std::vector<std::string> overrides;  // key=value
  bool check_compat = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "flat key = value config file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--mesh", c.mesh_path, "mesh file, overrides mesh.path");
  cmd->add_option("--set", c.overrides, "extra key=value settings");
  cmd->add_flag("--check-compat", c.check_compat, "report int f + <t0, 1>");
}

Config load_config(const Common& c) {
  Config cfg = Config::load(c.config_path);
  if (!c.mesh_path.empty()) cfg.set("mesh.path", c.mesh_path);
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError(kv, "--set expects key=value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    cfg.set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
  }
  return cfg;
}

std::string output_root(const RunConfig& rc) {
  if (const char* env = std::getenv("FEBE_OUT"); env && *env) return env;
  return rc.output;
}

void write_manifest(const std::string& dir, const std::string& command, const RunConfig& rc, double scale) {
  std::ofstream f(dir + "/manifest.txt");
  if (!f) throw std::runtime_error("cannot write " + dir + "/manifest.txt");
  // every non-comment line is a config key, so the manifest can be fed back to --config
  f << "# command = " << command << "\n";
  f << "# capacity_scale = " << format_number(scale) << "\n";
  f << "# preset = " << rc.preset << "\n";
  f << rc.raw.dump();
}

void check_compat(const RunConfig& rc) {
  const Preset preset = run_preset(rc);
  auto mesh = initial_mesh(rc, preset);
  const CoupledSpaces sp = make_spaces(mesh, rc.exterior, rc.bem);
  const ProblemData data = make_problem_data(sp, preset.f, preset.u0, preset.t0, rc.fem_quad_order);
  const Vector r = compat_residual(sp, data);
  const double size = data.load.cwiseAbs().sum() + data.t0_load.cwiseAbs().sum();
  std::string values;
  for (Eigen::Index i = 0; i < r.size(); ++i) values += (i ? " " : "") + format_number(r[i]);
  if (r.cwiseAbs().maxCoeff() > 1e-5 * size + 1e-14) {
    std::cerr << "warning: incompatible data, int f + <t0, 1> = " << values << "\n";
  } else {
    std::cerr << "compat: int f + <t0, 1> = " << values << "\n";
  }
}

void print_records(const std::vector<AdaptiveRecord>& recs) {
  for (const auto& r : recs) {
    std::printf("level %d  triangles %d  dofs %d  eta %.6e", r.level, r.triangles, r.dofs(), r.estimator);
    if (r.has_error) std::printf("  error %.6e", r.error);
    std::printf("  iters %d%s\n", r.iterations, r.converged ? "" : "  (not converged)");
  }
}

int cmd_solve(const Common& c) {
  const RunConfig rc = parse_run_config(load_config(c));
  if (c.check_compat) check_compat(rc);
  const std::string root = output_root(rc);
  fs::create_directories(root);
  double scale = 1.0;
  initial_mesh(rc, run_preset(rc), &scale);
  write_manifest(root, "solve", rc, scale);
  LevelState last;
  std::vector<AdaptiveRecord> recs;
  try {
    recs = run_adaptive(rc, root, &last);
  } catch (const PartialRunError& e) {
    write_table_csv(convergence_table(e.records), root + "/convergence.csv");
    throw;
  }
  write_table_csv(convergence_table(recs), root + "/convergence.csv");
  export_fields(*last.spaces, last.data, last.solution, last.estimate.element_indicators(*last.mesh), root + "/solution");
  print_records(recs);
  std::printf("output: %s\n", root.c_str());
  return recs.back().converged ? 0 : 3;
}

int cmd_study(const Common& c, int levels, const std::string& mode) {
  const RunConfig rc = parse_run_config(load_config(c));
  if (c.check_compat) check_compat(rc);
  const std::string root = output_root(rc);
  fs::create_directories(root);
  double scale = 1.0;
  initial_mesh(rc, run_preset(rc), &scale);
  RunConfig manifest_rc = rc;
  manifest_rc.raw.set("adapt.levels", std::to_string(levels));
  manifest_rc.raw.set("adapt.mode", mode);
  write_manifest(root, "study", manifest_rc, scale);
  ConvergenceTable table;
  try {
    table = convergence_study(rc, levels, mode, root);
  } catch (const PartialRunError& e) {
    table = convergence_table(e.records);
    write_table_csv(table, root + "/convergence.csv");
    std::fputs(format_table(table).c_str(), stdout);
    throw;
  }
  write_table_csv(table, root + "/convergence.csv");
  std::fputs(format_table(table).c_str(), stdout);
  if (!table.uses_error) std::printf("(no exact solution: rates use the estimator)\n");
  return 0;
}

int cmd_oracle(const Common& c, long iters) {
  const RunConfig rc = parse_run_config(load_config(c));
  if (c.check_compat) check_compat(rc);
  const std::string root = output_root(rc);
  fs::create_directories(root);
  const Preset preset = run_preset(rc);
  double scale = 1.0;
  auto mesh = initial_mesh(rc, preset, &scale);
  write_manifest(root, "oracle", rc, scale);
  LevelState s = solve_level(rc, preset, mesh);
  OracleOptions opt;
  opt.compat = rc.solver.compat;
  if (iters > 0) opt.subgradient_iters = iters;
  const OracleResult o = oracle_vi(*s.spaces, rc.material(), s.data, s.friction, opt);
  const double solver_obj = objective(*s.spaces, rc.material(), s.data, s.friction, s.solution.u, s.solution.v);
  const double gap = solver_obj - o.objective;
  const double vscale = std::max(1e-300, s.solution.v.cwiseAbs().maxCoeff());
  const bool same_pattern = stick_slip_pattern(*s.spaces, s.solution.v, 1e-6 * vscale) ==
                            stick_slip_pattern(*s.spaces, o.v, 1e-6 * vscale);
  std::ofstream f(root + "/oracle.csv");
  f << "quantity,value\n"
    << "solver_objective," << format_number(solver_obj) << "\n"
    << "oracle_objective," << format_number(o.objective) << "\n"
    << "gap," << format_number(gap) << "\n"
    << "exact," << (o.exact ? 1 : 0) << "\n"
    << "evaluated," << o.evaluated << "\n"
    << "same_pattern," << (same_pattern ? 1 : 0) << "\n";
  std::printf("solver objective  %.17g\noracle objective  %.17g\ngap               %.3e\n", solver_obj, o.objective,
              gap);
  std::printf("oracle: %s, %ld %s\n", o.exact ? "enumeration" : "projected subgradient", o.evaluated,
              o.exact ? "patterns" : "iterations");
  std::printf("stick/slip pattern %s\n", same_pattern ? "matches" : "differs");
  return 0;
}

int cmd_export(const Common& c, const std::string& prefix) {
  const RunConfig rc = parse_run_config(load_config(c));
  if (c.check_compat) check_compat(rc);
  const std::string root = output_root(rc);
  fs::create_directories(root);
  const Preset preset = run_preset(rc);
  double scale = 1.0;
  auto mesh = initial_mesh(rc, preset, &scale);
  write_manifest(root, "export", rc, scale);
  LevelState s = solve_level(rc, preset, mesh);
  export_fields(*s.spaces, s.data, s.solution, s.estimate.element_indicators(*mesh), root + "/" + prefix);
  save_mesh_file(*mesh, root + "/" + prefix + "_mesh.txt");
  std::printf("wrote %s/%s.vtk\n", root.c_str(), prefix.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FE/BE coupled contact solver"};
  app.require_subcommand(1);
  Common solve_opts, study_opts, oracle_opts, export_opts;
  auto* solve = app.add_subcommand("solve", "single solve or adaptive loop");
  add_common(solve, solve_opts);
  auto* study = app.add_subcommand("study", "convergence table");
  add_common(study, study_opts);
  int levels = 4;
  std::string mode = "uniform";
  study->add_option("--levels", levels, "number of levels")->check(CLI::PositiveNumber);
  study->add_option("--mode", mode, "uniform or adaptive")->check(CLI::IsMember({"uniform", "adaptive"}));
  auto* oracle = app.add_subcommand("oracle", "compare the solver with the brute-force oracle");
  add_common(oracle, oracle_opts);
  long iters = 0;
  oracle->add_option("--iters", iters, "subgradient iterations for p != 2");
  auto* exp = app.add_subcommand("export", "solve on the initial mesh and write VTK/CSV fields");
  add_common(exp, export_opts);
  std::string prefix = "fields";
  exp->add_option("--prefix", prefix, "file name prefix inside the output root");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*solve) return cmd_solve(solve_opts);
    if (*study) return cmd_study(study_opts, levels, mode);
    if (*oracle) return cmd_oracle(oracle_opts, iters);
    if (*exp) return cmd_export(export_opts, prefix);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
