#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "febe/material.hpp"
#include "febe/mesh.hpp"

namespace febe {

/// Boundary element spaces on the boundary polygon of a mesh: continuous
/// piecewise linears on the loop and piecewise constants on its panels.
/// Panel e joins loop node e and loop node e+1 (cyclically). Dof of node or
/// panel k, component c is k * components + c.
class BoundarySpace {
 public:
  BoundarySpace(std::shared_ptr<const Mesh> mesh, int components);

  const Mesh& mesh() const { return *mesh_; }
  int components() const { return components_; }
  int num_nodes() const { return n_; }
  int num_panels() const { return n_; }
  int linear_dofs() const { return n_ * components_; }
  int constant_dofs() const { return n_ * components_; }

  const Point& node(int k) const;
  int panel_start(int e) const { return e; }
  int panel_end(int e) const { return (e + 1) % n_; }
  double panel_length(int e) const { return length_[e]; }
  Point panel_tangent(int e) const;
  Point panel_normal(int e) const;
  Point panel_point(int e, double s) const;
  BoundaryLabel panel_label(int e) const;

  /// Nodes strictly inside Gamma_s (both adjacent panels slip).
  const std::vector<int>& slip_nodes() const { return slip_nodes_; }
  bool is_slip_node(int k) const { return slip_flag_[k]; }
  /// Half the length of the two adjacent panels.
  double lumped_mass(int k) const;
  /// Normalized average of the adjacent panel normals.
  Point nodal_normal(int k) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  int components_;
  int n_;
  std::vector<double> length_;
  std::vector<int> slip_nodes_;
  std::vector<bool> slip_flag_;
};

struct BemOptions {
  int quad_order = 8;
  bool half_factor = false;
};

/// Galerkin matrices with the non-doubled convention: V, K, W such that the
/// exterior Dirichlet-to-Neumann map is S = W + (M/2 - K)^T V^{-1} (M/2 - K).
struct BoundaryOperators {
  Eigen::MatrixXd V;              // constants x constants
  Eigen::MatrixXd K;              // constants x linears, <psi_i, K phi_j>
  Eigen::MatrixXd W;              // linears x linears
  Eigen::MatrixXd M;              // constants x linears, <psi_i, phi_j>
  Eigen::MatrixXd mass;           // linears x linears, <phi_i, phi_j>
  Eigen::MatrixXd S;              // linears x linears
  Eigen::MatrixXd K_adjoint() const { return K.transpose(); }
  ExteriorCoefficients coeffs;
  double scale = 1.0;
  bool half_factor = false;
};

/// Exterior fundamental solution: -log|x-y| / (2 pi) in scalar mode, the Lame
/// kernel in vector mode.
Eigen::MatrixXd fundamental_solution(const ExteriorCoefficients& coeffs, const Point& x,
                                     const Point& y);
/// Kernel of the double layer potential: (K w)(x) = int T(x, y) w(y) ds_y.
Eigen::MatrixXd double_layer_kernel(const ExteriorCoefficients& coeffs, const Point& x,
                                    const Point& y, const Point& normal_y);

BoundaryOperators assemble_operators(const BoundarySpace& space,
                                     const ExteriorCoefficients& coeffs,
                                     const BemOptions& options = {});
/// S_h = W + (M/2 - K)^T V^{-1} (M/2 - K), halved with `half_factor`.
Eigen::MatrixXd steklov_poincare(const BoundaryOperators& ops);

/// Rigid motion traces and their orthonormalized L2 projections onto the
/// piecewise constants.
struct RigidBodyBasis {
  Eigen::MatrixXd traces;        // linears x D, nodal values
  Eigen::MatrixXd projections;   // constants x D, orthonormal in L2
  /// Rank-D addendum on (linears, constants): R^T R with
  /// R = xi^T [M/2 - K, V].
  Eigen::MatrixXd stabilization;
  int dimension() const { return static_cast<int>(traces.cols()); }
};
RigidBodyBasis stabilization_data(const BoundarySpace& space, const BoundaryOperators& ops);

/// Smallest generalized eigenvalue of (S_h, boundary mass).
double coercivity_constant(const BoundaryOperators& ops);

/// Pointwise layer potentials at the point of panel `e` with parameter s in
/// (0, 1): single layer of a piecewise constant density and double layer of a
/// piecewise linear function.
Eigen::VectorXd single_layer_at(const BoundarySpace& space, const ExteriorCoefficients& coeffs,
                                const Eigen::VectorXd& phi, int e, double s,
                                int quad_order = 8);
Eigen::VectorXd double_layer_at(const BoundarySpace& space, const ExteriorCoefficients& coeffs,
                                const Eigen::VectorXd& w, int e, double s, int quad_order = 8);

/// Writes V.csv, K.csv, W.csv, S.csv, M.csv into `dir`.
void write_operators_csv(const BoundaryOperators& ops, const std::string& dir);

}  // namespace febe
