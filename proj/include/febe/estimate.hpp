#pragma once

#include <string>
#include <vector>

#include "febe/vi.hpp"

namespace febe {

enum class Entity { kElement, kEdge, kBoundaryEdge };
std::string entity_name(Entity e);

/// One estimator contribution: local values summed and raised to `outer`.
struct IndicatorTerm {
  std::string name;
  Entity entity = Entity::kElement;
  Vector local;        // >= 0, indexed by triangle, mesh edge or boundary edge
  double outer = 1.0;  // total = (sum local)^outer
  std::string exponent;

  double total() const;
};

struct IndicatorBreakdown {
  std::vector<IndicatorTerm> terms;
  double p = 2.0, r = 2.0, q = 2.0;

  double total() const;
  const IndicatorTerm& term(const std::string& name) const;
  bool has(const std::string& name) const;
  /// Local contributions merged onto triangles: interior edges are split
  /// between both neighbours, boundary edges go to their owner.
  Vector element_indicators(const Mesh& mesh) const;
};

/// Steklov-Poincare estimator for a solution of solve_contact_vi.
IndicatorBreakdown estimate_sp(const CoupledSpaces& spaces, const MaterialLaw& law, const ProblemData& data,
                               const FrictionData& friction, const DiscreteSolution& sol);
/// Layer potential estimator; requires sol.phi.
IndicatorBreakdown estimate_lp(const CoupledSpaces& spaces, const MaterialLaw& law, const ProblemData& data,
                               const FrictionData& friction, const DiscreteSolution& sol);

struct RecoveredGradient {
  Eigen::MatrixXd nodal;  // num_vertices x (components * 2), row-major gradient per vertex
  int components = 1;
  Eigen::MatrixXd at(const Mesh& mesh, int t, const std::array<double, 3>& bary) const;
};
RecoveredGradient recover_gradient(const FESpace& space, const Vector& u);

/// G(a, b) = |b|^2 (|a| + |b| + delta)^(p - 2).
double quasi_norm_kernel(double p, double delta, double a, double b);

/// Estimator for the scalar problem with p >= 2 based on gradient recovery.
IndicatorBreakdown estimate_scalar_recovery(const CoupledSpaces& spaces, const MaterialLaw& law,
                                            const ProblemData& data, const FrictionData& friction,
                                            const DiscreteSolution& sol, double delta = 0.0);

/// Rows: term, entity, id, value, exponent.
void write_indicators_csv(const IndicatorBreakdown& b, const std::string& path);

}  // namespace febe
