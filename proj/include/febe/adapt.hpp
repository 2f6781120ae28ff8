#pragma once

#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "febe/config.hpp"
#include "febe/estimate.hpp"
#include "febe/presets.hpp"
#include "febe/vi.hpp"

namespace febe {

/// Dorfler marking: the fewest largest entries whose sum reaches
/// theta * total. Ties keep the lower index first.
std::vector<int> mark(const Vector& indicators, double theta);
/// Marks triangles from merged element indicators.
std::set<int> mark(const IndicatorBreakdown& indicators, const Mesh& mesh, double theta);

/// Everything computed on one mesh.
struct LevelState {
  std::shared_ptr<const Mesh> mesh;
  std::unique_ptr<CoupledSpaces> spaces;
  ProblemData data;
  FrictionData friction;
  DiscreteSolution solution;
  IndicatorBreakdown estimate;
};

/// The preset named by the config with data offsets applied.
Preset run_preset(const RunConfig& config);

/// Per component: int f + <t0, 1>.
Vector compat_residual(const CoupledSpaces& spaces, const ProblemData& data);

LevelState solve_level(const RunConfig& config, const Preset& preset, std::shared_ptr<const Mesh> mesh);

struct AdaptiveRecord {
  int level = 0;
  int triangles = 0;
  double h = 0.0;
  int dofs_interior = 0;
  int dofs_boundary_linear = 0;
  int dofs_boundary_constant = 0;
  int dofs_jump = 0;
  double estimator = 0.0;
  std::vector<std::pair<std::string, double>> parts;
  bool has_error = false;
  double error_gradient = 0.0;  // ||grad(u - u_h)||_{L^p}
  double error_boundary = 0.0;  // <S_h e, e>^(1/2) on the boundary
  double error = 0.0;           // sum of both
  double error_q = 0.0;         // error^q
  int iterations = 0;
  bool converged = false;
  double wall_time = 0.0;
  int marked = 0;

  int dofs() const { return dofs_interior + dofs_jump; }
};

AdaptiveRecord make_record(int level, const RunConfig& config, const Preset& preset, const LevelState& state);

/// The initial mesh of a run: preset mesh or mesh.path, uniform pre-refinement
/// and capacity scaling. `scale` receives the geometry factor.
std::shared_ptr<const Mesh> initial_mesh(const RunConfig& config, const Preset& preset, double* scale = nullptr);

/// Thrown when a level fails; carries the records of the finished levels.
class PartialRunError : public std::runtime_error {
 public:
  PartialRunError(const std::string& what, std::vector<AdaptiveRecord> records)
      : std::runtime_error(what), records(std::move(records)) {}
  std::vector<AdaptiveRecord> records;
};

/// Solve, estimate, mark, refine until adapt.levels, adapt.max_dofs or
/// adapt.target_eta stops the loop. With a nonempty `outdir` each level is
/// written to outdir/level_k and outdir/records.csv is rewritten per level.
std::vector<AdaptiveRecord> run_adaptive(const RunConfig& config, const std::string& outdir = "",
                                         LevelState* final_state = nullptr);

void write_records_csv(const std::vector<AdaptiveRecord>& records, const std::string& path);

}  // namespace febe
