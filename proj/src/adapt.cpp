#include "febe/adapt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "febe/export.hpp"

namespace febe {

std::vector<int> mark(const Vector& indicators, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("mark: theta must lie in (0, 1]");
  std::vector<int> order(indicators.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return indicators[a] > indicators[b]; });
  const double total = indicators.sum();
  std::vector<int> out;
  if (total <= 0.0) return out;
  double acc = 0.0;
  for (int i : order) {
    if (indicators[i] <= 0.0) break;
    out.push_back(i);
    acc += indicators[i];
    if (acc >= theta * total * (1.0 - 1e-14)) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::set<int> mark(const IndicatorBreakdown& indicators, const Mesh& mesh, double theta) {
  const auto m = mark(indicators.element_indicators(mesh), theta);
  return std::set<int>(m.begin(), m.end());
}

Preset run_preset(const RunConfig& config) {
  Preset preset = make_preset(config.preset, config.material());
  shift_data(preset, config.f_offset, config.t0_offset);
  return preset;
}

Vector compat_residual(const CoupledSpaces& spaces, const ProblemData& data) {
  const int c = spaces.components();
  Vector r = Vector::Zero(c);
  for (Eigen::Index i = 0; i < data.load.size(); ++i) r[i % c] += data.load[i];
  for (Eigen::Index i = 0; i < data.t0_load.size(); ++i) r[i % c] += data.t0_load[i];
  return r;
}

LevelState solve_level(const RunConfig& config, const Preset& preset, std::shared_ptr<const Mesh> mesh) {
  LevelState s;
  s.mesh = mesh;
  s.spaces = std::make_unique<CoupledSpaces>(make_spaces(mesh, config.exterior, config.bem));
  const auto& sp = *s.spaces;
  s.data = make_problem_data(sp, preset.f, preset.u0, preset.t0, config.fem_quad_order);
  const double scale = config.friction_scale;
  auto bound = preset.friction;
  s.friction = make_friction(sp, [bound, scale](const Point& x) { return bound ? scale * bound(x) : 0.0; });
  const MaterialLaw law = config.material();
  if (config.formulation == Formulation::kLayerPotential) {
    s.solution = solve_layerpotential_vi(sp, law, s.data, s.friction, config.stabilized, config.solver);
  } else {
    s.solution = solve_contact_vi(sp, law, s.data, s.friction, config.solver);
  }
  std::string kind = config.estimator;
  if (kind == "auto") kind = config.formulation == Formulation::kLayerPotential ? "lp" : "sp";
  if (kind == "lp") {
    if (s.solution.phi.size() == 0) s.solution.phi = layer_density(sp, s.data, total_trace(sp, s.solution));
    s.estimate = estimate_lp(sp, law, s.data, s.friction, s.solution);
  } else if (kind == "recovery") {
    s.estimate = estimate_scalar_recovery(sp, law, s.data, s.friction, s.solution, config.estimate_delta);
  } else {
    s.estimate = estimate_sp(sp, law, s.data, s.friction, s.solution);
  }
  return s;
}

AdaptiveRecord make_record(int level, const RunConfig& config, const Preset& preset, const LevelState& state) {
  const auto& sp = *state.spaces;
  AdaptiveRecord r;
  r.level = level;
  r.triangles = state.mesh->num_triangles();
  r.h = mesh_size(*state.mesh).h;
  r.dofs_interior = sp.fe.num_dofs();
  r.dofs_boundary_linear = sp.boundary.linear_dofs();
  r.dofs_boundary_constant = sp.boundary.constant_dofs();
  r.dofs_jump = static_cast<int>(state.solution.v.size());
  r.estimator = state.estimate.total();
  for (const auto& t : state.estimate.terms) r.parts.emplace_back(t.name, t.total());
  r.iterations = state.solution.iterations;
  r.converged = state.solution.converged;
  if (preset.exact) {
    r.has_error = true;
    r.error_gradient = gradient_error(sp.fe, state.solution.u, preset.exact_gradient, config.p).gradient;
    const Vector w = total_trace(sp, state.solution);
    Vector exact_trace(w.size());
    const int c = sp.components();
    for (int k = 0; k < sp.boundary.num_nodes(); ++k)
      exact_trace.segment(k * c, c) = (*preset.exact)(sp.boundary.node(k));
    const Vector e = exact_trace - w;
    r.error_boundary = std::sqrt(std::max(0.0, e.dot(sp.ops.S * e)));
    r.error = r.error_gradient + r.error_boundary;
    r.error_q = std::pow(r.error, std::max(config.p, 2.0));
  }
  return r;
}

std::shared_ptr<const Mesh> initial_mesh(const RunConfig& config, const Preset& preset, double* scale) {
  Mesh m = config.mesh_path.empty() ? preset.mesh : load_mesh_file(config.mesh_path);
  for (int i = 0; i < config.mesh_refine; ++i) m = refine_uniform(m);
  m = normalize_capacity(m, config.capacity_target);
  if (scale) *scale = m.scale();
  return std::make_shared<const Mesh>(std::move(m));
}

std::vector<AdaptiveRecord> run_adaptive(const RunConfig& config, const std::string& outdir,
                                         LevelState* final_state) {
  const Preset preset = run_preset(config);
  auto mesh = initial_mesh(config, preset);
  std::vector<AdaptiveRecord> records;
  for (int level = 0;; ++level) {
    const auto start = std::chrono::steady_clock::now();
    LevelState state;
    try {
      state = solve_level(config, preset, mesh);
    } catch (const std::exception& e) {
      throw PartialRunError("level " + std::to_string(level) + ": " + e.what(), std::move(records));
    }
    AdaptiveRecord rec = make_record(level, config, preset, state);
    const bool last = level + 1 >= config.levels || (config.target_eta > 0.0 && rec.estimator <= config.target_eta);
    Mesh next;
    if (!last) {
      if (config.mode == "uniform") {
        next = *mesh;
        for (int i = 0; i < config.uniform_bisections; ++i) next = refine_uniform(next);
        rec.marked = mesh->num_triangles();
      } else {
        const auto marked = mark(state.estimate, *mesh, config.theta);
        rec.marked = static_cast<int>(marked.size());
        next = refine(*mesh, marked);
      }
    }
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!outdir.empty()) {
      const std::string dir = outdir + "/level_" + std::to_string(level);
      std::filesystem::create_directories(dir);
      save_mesh_file(*mesh, dir + "/mesh.txt");
      const PointFields f = point_fields(*state.spaces, state.data, state.solution);
      write_points_csv(dir + "/solution.csv", *mesh, f);
      write_indicators_csv(state.estimate, dir + "/indicators.csv");
    }
    records.push_back(std::move(rec));
    if (!outdir.empty()) write_records_csv(records, outdir + "/records.csv");
    if (last) {
      if (final_state) *final_state = std::move(state);
      break;
    }
    // dofs of the next level: interior P1 dofs grow with the vertex count
    const long next_dofs = static_cast<long>(next.num_vertices()) * config.components();
    if (next_dofs > config.max_dofs) {
      if (final_state) *final_state = std::move(state);
      break;
    }
    mesh = std::make_shared<const Mesh>(std::move(next));
  }
  return records;
}

void write_records_csv(const std::vector<AdaptiveRecord>& records, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "level,triangles,h,dofs_interior,dofs_boundary_linear,dofs_boundary_constant,dofs_jump,estimator,"
       "error_gradient,error_boundary,error,error_q,iterations,converged,marked";
  if (!records.empty())
    for (const auto& [name, v] : records.front().parts) f << ",eta_" << name;
  f << '\n';
  for (const auto& r : records) {
    f << r.level << ',' << r.triangles << ',' << format_number(r.h) << ',' << r.dofs_interior << ','
      << r.dofs_boundary_linear << ',' << r.dofs_boundary_constant << ',' << r.dofs_jump << ','
      << format_number(r.estimator) << ',' << format_number(r.error_gradient) << ','
      << format_number(r.error_boundary) << ',' << format_number(r.error) << ',' << format_number(r.error_q) << ','
      << r.iterations << ',' << (r.converged ? 1 : 0) << ',' << r.marked;
    for (const auto& [name, v] : r.parts) f << ',' << format_number(v);
    f << '\n';
  }
}

}  // namespace febe
