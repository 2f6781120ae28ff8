#include "febe/fem.hpp"

#include <cmath>
#include <stdexcept>

#include "febe/quadrature.hpp"

namespace febe {

namespace {

void check_quad_order(int order) {
  if (order < 2) throw std::invalid_argument("fem.quad_order must be >= 2");
}

void check_length(const FESpace& space, const Vector& u) {
  if (u.size() != space.num_dofs()) {
    throw std::invalid_argument("coefficient vector length does not match the dof count");
  }
}

Point map_point(const Mesh& mesh, int t, const std::array<double, 3>& bary) {
  const auto& tri = mesh.triangles()[t];
  const auto& v = mesh.vertices();
  return bary[0] * v[tri[0]] + bary[1] * v[tri[1]] + bary[2] * v[tri[2]];
}

}  // namespace

FESpace::FESpace(std::shared_ptr<const Mesh> mesh, int components)
    : mesh_(std::move(mesh)), components_(components) {
  if (!mesh_) throw std::invalid_argument("FESpace needs a mesh");
  if (components != 1 && components != 2) {
    throw std::invalid_argument("FESpace supports 1 or 2 components");
  }
}

Eigen::Matrix<double, 2, 3> FESpace::basis_gradients(int t) const {
  const auto& tri = mesh_->triangles()[t];
  const auto& v = mesh_->vertices();
  const Point& p0 = v[tri[0]];
  const Point& p1 = v[tri[1]];
  const Point& p2 = v[tri[2]];
  const double det = (p1 - p0).x() * (p2 - p0).y() - (p1 - p0).y() * (p2 - p0).x();
  Eigen::Matrix<double, 2, 3> g;
  // grad lambda_k = rot(opposite edge) / det
  g.col(0) << p1.y() - p2.y(), p2.x() - p1.x();
  g.col(1) << p2.y() - p0.y(), p0.x() - p2.x();
  g.col(2) << p0.y() - p1.y(), p1.x() - p0.x();
  return g / det;
}

Eigen::MatrixXd FESpace::strain_operator(int t) const {
  const auto g = basis_gradients(t);
  if (components_ == 1) return g;
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(3, 6);
  const double r = 1.0 / std::sqrt(2.0);
  for (int k = 0; k < 3; ++k) {
    b(0, 2 * k) = g(0, k);
    b(1, 2 * k + 1) = g(1, k);
    b(2, 2 * k) = r * g(1, k);
    b(2, 2 * k + 1) = r * g(0, k);
  }
  return b;
}

std::vector<int> FESpace::local_dofs(int t) const {
  const auto& tri = mesh_->triangles()[t];
  std::vector<int> dofs;
  dofs.reserve(3 * components_);
  for (int k = 0; k < 3; ++k) {
    for (int c = 0; c < components_; ++c) dofs.push_back(dof(tri[k], c));
  }
  return dofs;
}

Vector FESpace::element_strain(int t, const Vector& u) const {
  const auto dofs = local_dofs(t);
  Vector ul(dofs.size());
  for (std::size_t i = 0; i < dofs.size(); ++i) ul[i] = u[dofs[i]];
  return strain_operator(t) * ul;
}

Eigen::MatrixXd FESpace::element_gradient(int t, const Vector& u) const {
  const auto g = basis_gradients(t);
  const auto& tri = mesh_->triangles()[t];
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(components_, 2);
  for (int k = 0; k < 3; ++k) {
    for (int c = 0; c < components_; ++c) {
      grad.row(c) += u[dof(tri[k], c)] * g.col(k).transpose();
    }
  }
  return grad;
}

Vector FESpace::evaluate(int t, const std::array<double, 3>& bary, const Vector& u) const {
  const auto& tri = mesh_->triangles()[t];
  Vector val = Vector::Zero(components_);
  for (int k = 0; k < 3; ++k) {
    for (int c = 0; c < components_; ++c) val[c] += bary[k] * u[dof(tri[k], c)];
  }
  return val;
}

Vector FESpace::trace(const Vector& u) const {
  const auto& loop = mesh_->boundary_loop();
  Vector tr(static_cast<Eigen::Index>(loop.size()) * components_);
  for (std::size_t k = 0; k < loop.size(); ++k) {
    for (int c = 0; c < components_; ++c) tr[k * components_ + c] = u[dof(loop[k], c)];
  }
  return tr;
}

Vector strain_from_gradient(const Eigen::MatrixXd& grad) {
  if (grad.rows() == 1) return grad.row(0).transpose();
  Vector e(3);
  e << grad(0, 0), grad(1, 1), (grad(0, 1) + grad(1, 0)) / std::sqrt(2.0);
  return e;
}

Eigen::MatrixXd stress_tensor(const Vector& s, int components) {
  if (components == 1) return s.transpose();
  Eigen::MatrixXd m(2, 2);
  const double off = s[2] / std::sqrt(2.0);
  m << s[0], off, off, s[1];
  return m;
}

Vector assemble_residual(const FESpace& space, const MaterialLaw& law, const Vector& u,
                         int quad_order) {
  check_quad_order(quad_order);
  check_length(space, u);
  const Mesh& mesh = space.mesh();
  Vector r = Vector::Zero(space.num_dofs());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto b = space.strain_operator(t);
    const auto dofs = space.local_dofs(t);
    Vector ul(dofs.size());
    for (std::size_t i = 0; i < dofs.size(); ++i) ul[i] = u[dofs[i]];
    const Vector local = mesh.area(t) * (b.transpose() * law.stress(b * ul));
    for (std::size_t i = 0; i < dofs.size(); ++i) r[dofs[i]] += local[i];
  }
  return r;
}

SparseMatrix assemble_tangent(const FESpace& space, const MaterialLaw& law, const Vector& u) {
  check_length(space, u);
  const Mesh& mesh = space.mesh();
  std::vector<Eigen::Triplet<double>> trips;
  const int nl = 3 * space.components();
  trips.reserve(static_cast<std::size_t>(mesh.num_triangles()) * nl * nl);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto b = space.strain_operator(t);
    const auto dofs = space.local_dofs(t);
    Vector ul(nl);
    for (int i = 0; i < nl; ++i) ul[i] = u[dofs[i]];
    const Eigen::MatrixXd local = mesh.area(t) * (b.transpose() * law.tangent(b * ul) * b);
    for (int i = 0; i < nl; ++i) {
      for (int j = 0; j < nl; ++j) trips.emplace_back(dofs[i], dofs[j], local(i, j));
    }
  }
  SparseMatrix m(space.num_dofs(), space.num_dofs());
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

double assemble_energy(const FESpace& space, const MaterialLaw& law, const Vector& u) {
  check_length(space, u);
  const Mesh& mesh = space.mesh();
  double e = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    e += mesh.area(t) * law.potential(space.element_strain(t, u).norm());
  }
  return e;
}

Vector assemble_load(const FESpace& space, const VectorField& f, int quad_order) {
  check_quad_order(quad_order);
  const Mesh& mesh = space.mesh();
  const auto& rule = triangle_rule(quad_order);
  const int nc = space.components();
  Vector load = Vector::Zero(space.num_dofs());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const double jac = 2.0 * mesh.area(t);
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const auto& bary = rule.barycentric[q];
      const Vector fv = f(map_point(mesh, t, bary));
      for (int k = 0; k < 3; ++k) {
        for (int c = 0; c < nc; ++c) {
          load[space.dof(tri[k], c)] += jac * rule.weights[q] * bary[k] * fv[c];
        }
      }
    }
  }
  return load;
}

Vector assemble_boundary_load(const Mesh& mesh, int components, const BoundaryField& g,
                              int points) {
  const auto& loop = mesh.boundary_loop();
  const int n = static_cast<int>(loop.size());
  const auto& rule = gauss_legendre(points);
  Vector out = Vector::Zero(static_cast<Eigen::Index>(n) * components);
  for (int e = 0; e < mesh.num_boundary_edges(); ++e) {
    const Point& a = mesh.vertices()[loop[e]];
    const Point& b = mesh.vertices()[loop[(e + 1) % n]];
    const Point normal = mesh.boundary_normal(e);
    const double len = mesh.boundary_length(e);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double s = rule.points[q];
      const Vector gv = g(a + s * (b - a), normal, e);
      const double w = rule.weights[q] * len;
      for (int c = 0; c < components; ++c) {
        out[e * components + c] += w * (1.0 - s) * gv[c];
        out[((e + 1) % n) * components + c] += w * s * gv[c];
      }
    }
  }
  return out;
}

Norms norms(const FESpace& space, const Vector& u, double p, int quad_order,
            const BoundaryLabel* gamma) {
  check_length(space, u);
  const Mesh& mesh = space.mesh();
  const auto& rule = triangle_rule(quad_order);
  double lp = 0.0;
  double grad_p = 0.0;
  double strain_p = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double area = mesh.area(t);
    grad_p += area * std::pow(space.element_gradient(t, u).norm(), p);
    strain_p += area * std::pow(space.element_strain(t, u).norm(), p);
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      lp += 2.0 * area * rule.weights[q] * std::pow(space.evaluate(t, rule.barycentric[q], u).norm(), p);
    }
  }
  const auto& line = gauss_legendre(8);
  const auto& loop = mesh.boundary_loop();
  const int n = static_cast<int>(loop.size());
  double l1 = 0.0;
  for (int e = 0; e < mesh.num_boundary_edges(); ++e) {
    if (gamma && mesh.boundary_edges()[e].label != *gamma) continue;
    const int va = loop[e];
    const int vb = loop[(e + 1) % n];
    for (std::size_t q = 0; q < line.points.size(); ++q) {
      const double s = line.points[q];
      Vector val(space.components());
      for (int c = 0; c < space.components(); ++c) {
        val[c] = (1.0 - s) * u[space.dof(va, c)] + s * u[space.dof(vb, c)];
      }
      l1 += line.weights[q] * mesh.boundary_length(e) * val.norm();
    }
  }
  Norms out;
  out.w1p = std::pow(lp + grad_p, 1.0 / p);
  out.strain_lp = std::pow(strain_p, 1.0 / p);
  out.trace_l1 = l1;
  return out;
}

GradientError gradient_error(const FESpace& space, const Vector& u, const MatrixField& exact_grad,
                             double p, int quad_order) {
  check_length(space, u);
  const Mesh& mesh = space.mesh();
  const auto& rule = triangle_rule(quad_order);
  double eg = 0.0;
  double es = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Eigen::MatrixXd gh = space.element_gradient(t, u);
    const Vector sh = strain_from_gradient(gh);
    const double jac = 2.0 * mesh.area(t);
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const Eigen::MatrixXd g = exact_grad(map_point(mesh, t, rule.barycentric[q]));
      eg += jac * rule.weights[q] * std::pow((g - gh).norm(), p);
      es += jac * rule.weights[q] * std::pow((strain_from_gradient(g) - sh).norm(), p);
    }
  }
  return {std::pow(eg, 1.0 / p), std::pow(es, 1.0 / p)};
}

Vector interpolate(const FESpace& space, const VectorField& f) {
  const Mesh& mesh = space.mesh();
  Vector u(space.num_dofs());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Vector val = f(mesh.vertices()[v]);
    for (int c = 0; c < space.components(); ++c) u[space.dof(v, c)] = val[c];
  }
  return u;
}

}  // namespace febe
