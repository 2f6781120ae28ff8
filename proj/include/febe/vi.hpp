#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "febe/bem.hpp"
#include "febe/fem.hpp"
#include "febe/material.hpp"
#include "febe/mesh.hpp"

namespace febe {

/// Interior and boundary discretizations sharing one mesh.
struct CoupledSpaces {
  std::shared_ptr<const Mesh> mesh;
  FESpace fe;
  BoundarySpace boundary;
  BoundaryOperators ops;
  RigidBodyBasis rigid;
  ExteriorCoefficients coeffs;

  int components() const { return fe.components(); }
  int num_slip() const { return static_cast<int>(boundary.slip_nodes().size()); }
  /// Unit tangent at a boundary node, the normal rotated counterclockwise.
  Point nodal_tangent(int k) const;
};

CoupledSpaces make_spaces(std::shared_ptr<const Mesh> mesh, const ExteriorCoefficients& coeffs,
                          const BemOptions& options = {});

/// Analytic data f, u0, t0 and their discrete representations.
struct ProblemData {
  VectorField f;
  VectorField u0;
  BoundaryField t0;  // (x, outward normal, boundary edge)
  Vector load;       // int f . phi_i over the FE dofs
  Vector u0_trace;   // nodal values on the boundary loop
  Vector t0_load;    // <t0, phi_k> over the boundary linears
};

/// Nodal boundary directions of the compatibility constraints: all rigid
/// traces (count = D), their sum (count = 1) or none.
Eigen::MatrixXd compat_directions(const CoupledSpaces& spaces, int count);

ProblemData make_problem_data(const CoupledSpaces& spaces, VectorField f, VectorField u0,
                              BoundaryField t0, int quad_order = 4);
/// Data with f = 0, u0 = 0, t0 = 0.
ProblemData zero_data(const CoupledSpaces& spaces);

/// Friction bound F (or g) at the boundary nodes.
struct FrictionData {
  std::function<double(const Point&)> bound;
  Vector nodal;  // per boundary loop node, >= 0
};
FrictionData make_friction(const CoupledSpaces& spaces, std::function<double(const Point&)> bound);

enum class CompatMode { kRigid, kSingle, kNone };
enum class Formulation { kSteklov, kLayerPotential };

struct SolverOptions {
  double tol = -1.0;  // negative: 1e-10 for p = 2, 1e-8 otherwise
  double gamma_start = 1e-2;
  double gamma_min = 1e-8;
  int max_iter = 200;
  CompatMode compat = CompatMode::kRigid;
  int quad_order = 4;
  bool polish = true;
  bool contact = true;   // impose v_n <= 0 (vector mode)
  bool friction = true;  // include j(v)
  /// Optional starting point (u, v) of matching size.
  std::optional<Vector> start;
};

struct EnergyRecord {
  double gamma = 0.0;
  double energy = 0.0;
};

/// Coefficients of a discrete solution. `v` holds, per node strictly inside
/// Gamma_s, the (normal, tangential) jump components in vector mode and the
/// scalar jump otherwise.
struct DiscreteSolution {
  Vector u;
  Vector v;
  Vector phi;                  // empty unless the layer potential form was solved
  Vector normal_multiplier;    // per slip node, >= 0 on contact
  Vector friction_multiplier;  // per slip node, tangential dual value
  Vector compat_multiplier;
  std::vector<EnergyRecord> history;
  double objective = 0.0;  // J_h + j at the returned point
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  bool polished = false;
};

/// Boundary values of the jump v as nodal linears on the loop.
Vector jump_trace(const CoupledSpaces& spaces, const Vector& v);
/// w = u|boundary + v.
Vector total_trace(const CoupledSpaces& spaces, const DiscreteSolution& sol);

/// Objective J_h + j with the exact (non-regularized) friction term.
double objective(const CoupledSpaces& spaces, const MaterialLaw& law, const ProblemData& data,
                 const FrictionData& friction, const Vector& u, const Vector& v,
                 bool with_friction = true);

DiscreteSolution solve_transmission(const CoupledSpaces& spaces, const MaterialLaw& law,
                                    const ProblemData& data, const SolverOptions& options = {});
DiscreteSolution solve_contact_vi(const CoupledSpaces& spaces, const MaterialLaw& law,
                                  const ProblemData& data, const FrictionData& friction,
                                  const SolverOptions& options = {});
DiscreteSolution solve_layerpotential_vi(const CoupledSpaces& spaces, const MaterialLaw& law,
                                         const ProblemData& data, const FrictionData& friction,
                                         bool stabilized, const SolverOptions& options = {});

/// Discrete conormal data at the slip nodes, from the boundary equation.
struct NodalStress {
  Vector sigma_n;
  Vector sigma_t;
  Vector v_n;
  Vector v_t;
};
NodalStress nodal_stress(const CoupledSpaces& spaces, const ProblemData& data,
                         const DiscreteSolution& sol);

struct KKTReport {
  double normal_stress = 0.0;     // max (sigma_n)_+
  double normal_gap = 0.0;        // max (v_n)_+
  double normal_complementarity = 0.0;  // max |sigma_n v_n|
  double friction_bound = 0.0;    // max (|sigma_t| - F)_+
  double friction_complementarity = 0.0;  // max |sigma_t v_t + F |v_t||
  double max() const;
};
KKTReport kkt_residuals(const CoupledSpaces& spaces, const ProblemData& data,
                        const FrictionData& friction, const DiscreteSolution& sol);

/// phi = -V^{-1}(M/2 - K)(w - u0).
Vector layer_density(const CoupledSpaces& spaces, const ProblemData& data, const Vector& w);

}  // namespace febe
