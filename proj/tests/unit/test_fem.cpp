#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "febe/fem.hpp"

using namespace febe;

namespace {

const char* kTriangle = "3 1 3\n0 0\n1 0\n0 1\n0 1 2\n0 1 T\n1 2 T\n2 0 T\n";
const char* kSquare =
    "4 2 4\n0 0\n1 0\n1 1\n0 1\n0 1 2\n0 2 3\n0 1 T\n1 2 T\n2 3 T\n3 0 T\n";

std::shared_ptr<const Mesh> share(Mesh m) { return std::make_shared<const Mesh>(std::move(m)); }

Vector random_vector(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

Vector rigid(const FESpace& s, double tx, double ty, double rot) {
  return interpolate(s, [&](const Point& x) {
    Vector v(2);
    v << tx - rot * x.y(), ty + rot * x.x();
    return v;
  });
}

}  // namespace

TEST_CASE("residual vanishes for zero and rigid fields") {
  const FESpace s(share(load_mesh(kSquare)), 2);
  const MaterialLaw law(2.0);
  CHECK(assemble_residual(s, law, Vector::Zero(s.num_dofs())).norm() == 0.0);
  CHECK(assemble_residual(s, law, rigid(s, 0.3, -0.7, 0.0)).norm() < 1e-14);
  CHECK_THROWS_AS(assemble_residual(s, law, Vector::Zero(s.num_dofs()), 1), std::invalid_argument);
}

TEST_CASE("constant strain residual on one triangle") {
  const FESpace s(share(load_mesh(kTriangle)), 2);
  const MaterialLaw law(3.0);
  // u = (0.4 x + 0.1 y, -0.3 x + 0.2 y)
  Eigen::Matrix2d grad;
  grad << 0.4, 0.1, -0.3, 0.2;
  const Vector u = interpolate(s, [&](const Point& x) { return Vector(grad * x); });
  const Eigen::Matrix2d eps = 0.5 * (grad + grad.transpose());
  const Eigen::Matrix2d sigma = eps.norm() * eps;  // |eps|^(p-2) eps with p = 3
  const Eigen::Vector2d gphi[3] = {{-1, -1}, {1, 0}, {0, 1}};
  const Vector r = assemble_residual(s, law, u);
  for (int k = 0; k < 3; ++k) {
    for (int c = 0; c < 2; ++c) {
      Eigen::Matrix2d gv = Eigen::Matrix2d::Zero();
      gv.row(c) = gphi[k].transpose();
      const Eigen::Matrix2d ev = 0.5 * (gv + gv.transpose());
      CHECK(r[s.dof(k, c)] == doctest::Approx(0.5 * (sigma.cwiseProduct(ev)).sum()).epsilon(1e-14));
    }
  }
}

TEST_CASE("tangent is the derivative of the residual") {
  std::mt19937_64 rng(2);
  const FESpace s(share(make_rectangle(0, 0, 1, 1, 3, 3)), 2);
  for (double p : {1.5, 2.0, 3.0}) {
    const MaterialLaw law(p, LawKind::kCarreau, 0.5);
    const Vector u = random_vector(s.num_dofs(), rng);
    const Vector w = random_vector(s.num_dofs(), rng);
    const SparseMatrix m = assemble_tangent(s, law, u);
    CHECK((SparseMatrix(m.transpose()) - m).norm() < 1e-12 * m.norm());
    const Vector mw = m * w;
    double prev = 1e300;
    for (double t : {1e-2, 1e-3, 1e-4}) {
      const Vector fd = (assemble_residual(s, law, u + t * w) - assemble_residual(s, law, u)) / t;
      const double err = (fd - mw).norm();
      if (p != 2.0) CHECK(err < prev);
      prev = err;
    }
    CHECK(prev < 1e-3 * mw.norm());
  }
}

TEST_CASE("tangent kernel contains rigid motions at p = 2") {
  const FESpace s(share(make_rectangle(0, 0, 1, 1, 2, 2)), 2);
  const MaterialLaw law(2.0);
  const SparseMatrix m = assemble_tangent(s, law, Vector::Zero(s.num_dofs()));
  CHECK((m * rigid(s, 0, 0, 1.0)).norm() < 1e-13);
  CHECK((m * rigid(s, 1.0, 0, 0)).norm() < 1e-13);
  std::mt19937_64 rng(4);
  const Vector other = random_vector(s.num_dofs(), rng);
  CHECK((m - assemble_tangent(s, law, other)).norm() == 0.0);
}

TEST_CASE("residual is the gradient of the energy and monotone") {
  std::mt19937_64 rng(9);
  const FESpace s(share(make_rectangle(0, 0, 1, 1, 3, 2)), 1);
  for (double p : {1.5, 3.0}) {
    const MaterialLaw law(p, LawKind::kCarreau, 1.0, LawMode::kVector);
    const Vector u = random_vector(s.num_dofs(), rng);
    const Vector w = random_vector(s.num_dofs(), rng);
    const double t = 1e-6;
    const double fd = (assemble_energy(s, law, u + t * w) - assemble_energy(s, law, u - t * w)) / (2 * t);
    CHECK(fd == doctest::Approx(assemble_residual(s, law, u).dot(w)).epsilon(1e-6));
    const Vector v = random_vector(s.num_dofs(), rng);
    CHECK((assemble_residual(s, law, u) - assemble_residual(s, law, v)).dot(u - v) >= 0.0);
  }
}

TEST_CASE("load assembly") {
  const FESpace s(share(make_rectangle(0, 0, 1, 1, 2, 2)), 2);
  const Vector zero = assemble_load(s, [](const Point&) { return Vector(Vector::Zero(2)); });
  CHECK(zero.norm() == 0.0);
  const Vector c = assemble_load(s, [](const Point&) { return Vector(Eigen::Vector2d(2.0, -1.0)); });
  double sx = 0.0, sy = 0.0;
  for (int v = 0; v < s.mesh().num_vertices(); ++v) {
    sx += c[s.dof(v, 0)];
    sy += c[s.dof(v, 1)];
  }
  CHECK(sx == doctest::Approx(2.0));
  CHECK(sy == doctest::Approx(-1.0));

  // int_T x * lambda_k over the reference triangle: 1/12, 1/24 ... exact moments
  const FESpace t(share(load_mesh(kTriangle)), 2);
  const Vector m = assemble_load(t, [](const Point& x) { return Vector(Eigen::Vector2d(x.x(), 0.0)); });
  CHECK(m[t.dof(0, 0)] == doctest::Approx(1.0 / 24.0));
  CHECK(m[t.dof(1, 0)] == doctest::Approx(1.0 / 12.0));
  CHECK(m[t.dof(2, 0)] == doctest::Approx(1.0 / 24.0));
  CHECK(m[t.dof(0, 1)] == 0.0);
}

TEST_CASE("norms") {
  const FESpace s(share(load_mesh(kSquare)), 2);
  const Norms z = norms(s, Vector::Zero(s.num_dofs()), 2.0);
  CHECK(z.w1p == 0.0);
  CHECK(z.strain_lp == 0.0);
  CHECK(z.trace_l1 == 0.0);
  // u = (x, 0): |grad| = 1, |eps| = 1, int u^2 = 1/3, trace L1 = 1 + 1/2 + 1/2
  const Vector u = interpolate(s, [](const Point& x) { return Vector(Eigen::Vector2d(x.x(), 0.0)); });
  const Norms n = norms(s, u, 2.0);
  CHECK(n.strain_lp == doctest::Approx(1.0));
  CHECK(n.w1p == doctest::Approx(std::sqrt(1.0 + 1.0 / 3.0)));
  CHECK(n.trace_l1 == doctest::Approx(2.0));
  // u = (y, x): grad has two unit entries, eps = [[0,1],[1,0]] has the same norm
  const Vector w = interpolate(s, [](const Point& x) { return Vector(Eigen::Vector2d(x.y(), x.x())); });
  const Norms nw = norms(s, w, 3.0);
  CHECK(nw.strain_lp == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("gradient error of the interpolant of a linear field is zero") {
  const FESpace s(share(make_rectangle(0, 0, 1, 1, 3, 3)), 1);
  const Vector u = interpolate(s, [](const Point& x) { return Vector::Constant(1, 2 * x.x() - x.y()); });
  const auto e = gradient_error(s, u, [](const Point&) {
    Eigen::MatrixXd g(1, 2);
    g << 2.0, -1.0;
    return g;
  }, 2.0);
  CHECK(e.gradient < 1e-13);
}

TEST_CASE("boundary load") {
  const Mesh m = load_mesh(kSquare);
  const Vector g = assemble_boundary_load(m, 1, [](const Point&, const Point&, int) {
    return Vector::Ones(1);
  });
  CHECK(g.sum() == doctest::Approx(4.0));
  for (int k = 0; k < 4; ++k) CHECK(g[k] == doctest::Approx(1.0));
}
