#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "febe/material.hpp"
#include "febe/mesh.hpp"

namespace febe {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Continuous P1 space on the interior mesh with one (scalar) or two
/// (vector) components per vertex. Dof of (vertex v, component c) is
/// v * components + c.
class FESpace {
 public:
  FESpace(std::shared_ptr<const Mesh> mesh, int components);

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
  int components() const { return components_; }
  int num_dofs() const { return mesh_->num_vertices() * components_; }
  int dof(int vertex, int component) const { return vertex * components_ + component; }
  /// Boundary-loop position k, component c -> global dof.
  int trace_dof(int k, int component) const {
    return dof(mesh_->boundary_loop()[k], component);
  }
  int num_trace_dofs() const {
    return static_cast<int>(mesh_->boundary_loop().size()) * components_;
  }
  /// Strain rows: 3 in vector mode (orthonormal symmetric coordinates), 2 in
  /// scalar mode (gradient).
  int strain_dimension() const { return components_ == 2 ? 3 : 2; }

  /// Constant element strain operator B (strain_dimension x 3*components)
  /// acting on the local dofs ordered (vertex k, component c) -> k*components+c.
  Eigen::MatrixXd strain_operator(int t) const;
  /// Barycentric gradients as columns.
  Eigen::Matrix<double, 2, 3> basis_gradients(int t) const;
  std::vector<int> local_dofs(int t) const;

  /// Elementwise strain (vector) / gradient (scalar) of a coefficient vector.
  Vector element_strain(int t, const Vector& u) const;
  /// Full gradient (components x 2) on element t.
  Eigen::MatrixXd element_gradient(int t, const Vector& u) const;
  /// Point value at barycentric coordinates of element t.
  Vector evaluate(int t, const std::array<double, 3>& bary, const Vector& u) const;

  /// Traction-free trace: coefficient vector restricted to the boundary loop.
  Vector trace(const Vector& u) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  int components_;
};

using VectorField = std::function<Vector(const Point&)>;
using MatrixField = std::function<Eigen::MatrixXd(const Point&)>;

/// Converts a (components x 2) gradient into the law's strain coordinates.
Vector strain_from_gradient(const Eigen::MatrixXd& grad);
/// Inverse map for stresses: strain coordinates -> symmetric 2x2 (vector
/// mode) or the 2-vector itself as a 1x2 row (scalar mode).
Eigen::MatrixXd stress_tensor(const Vector& strain_coords, int components);

/// Entry i = int A'(eps(u)) : eps(phi_i). P1 strains are elementwise constant
/// so the assembled value is exact; quadrature orders below 2 are rejected to
/// keep the contract uniform with the load assembly.
Vector assemble_residual(const FESpace& space, const MaterialLaw& law, const Vector& u,
                         int quad_order = 4);
SparseMatrix assemble_tangent(const FESpace& space, const MaterialLaw& law, const Vector& u);
/// Discrete energy int Psi(|eps(u)|).
double assemble_energy(const FESpace& space, const MaterialLaw& law, const Vector& u);

Vector assemble_load(const FESpace& space, const VectorField& f, int quad_order = 4);

/// Boundary functional int_{dOmega} g . phi_k over the boundary P1 basis, in
/// boundary-loop order (k * components + c). `g(x, normal, edge)`.
using BoundaryField = std::function<Vector(const Point&, const Point&, int)>;
Vector assemble_boundary_load(const Mesh& mesh, int components, const BoundaryField& g,
                              int points = 6);

struct Norms {
  double w1p = 0.0;        // ||u||_{W^{1,p}}
  double strain_lp = 0.0;  // ||eps(u)||_{L^p} (gradient in scalar mode)
  double trace_l1 = 0.0;   // ||u||_{L^1(Gamma)}
};

/// `gamma` selects the boundary part for the trace term; all of dOmega when
/// no label is given.
Norms norms(const FESpace& space, const Vector& u, double p, int quad_order = 4,
            const BoundaryLabel* gamma = nullptr);

/// || grad(exact) - grad(u_h) ||_{L^p} and || eps(exact) - eps(u_h) ||_{L^p}.
struct GradientError {
  double gradient = 0.0;
  double strain = 0.0;
};
GradientError gradient_error(const FESpace& space, const Vector& u, const MatrixField& exact_grad,
                             double p, int quad_order = 6);

/// Nodal interpolant of a field.
Vector interpolate(const FESpace& space, const VectorField& f);

}  // namespace febe
