#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "febe/bem.hpp"

using namespace febe;

namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<const Mesh> share(Mesh m) { return std::make_shared<const Mesh>(std::move(m)); }

ExteriorCoefficients laplace() { return {1.0, 1.0, true}; }
ExteriorCoefficients lame(double mu = 1.0, double lambda = 1.0) { return {mu, lambda, false}; }

// int_0^h log |x - y(t)| dt for a point x and the segment y(t) = a + t (b - a)/h.
double segment_log_integral(const Point& x, const Point& a, const Point& b) {
  const double h = (b - a).norm();
  const Point u = (b - a) / h;
  const double p = (x - a).dot(u);
  const double q = std::abs((x - a).x() * u.y() - (x - a).y() * u.x());
  auto f = [q](double z) {
    if (q < 1e-300) return z == 0.0 ? 0.0 : z * std::log(std::abs(z)) - z;
    return 0.5 * z * std::log(z * z + q * q) - z + q * std::atan(z / q);
  };
  return f(h - p) - f(-p);
}

// Galerkin entry -1/(2 pi) int_{e_i} int_{e_j} log|x-y| by inner closed form
// and adaptive outer quadrature.
double laplace_v_entry(const BoundarySpace& s, int i, int j) {
  const Point a0 = s.node(s.panel_start(i));
  const Point a1 = s.node(s.panel_end(i));
  const Point b0 = s.node(s.panel_start(j));
  const Point b1 = s.node(s.panel_end(j));
  auto inner = [&](double t) { return segment_log_integral(a0 + t * (a1 - a0), b0, b1); };
  const double outer =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(inner, 0.0, 1.0, 15, 1e-14);
  return -outer * s.panel_length(i) / (2.0 * kPi);
}

Eigen::VectorXd rigid_trace(const BoundarySpace& s, int which) {
  Eigen::VectorXd r(s.linear_dofs());
  for (int k = 0; k < s.num_nodes(); ++k) {
    const Point x = s.node(k);
    Eigen::Vector2d v = which == 0 ? Eigen::Vector2d(1, 0)
                        : which == 1 ? Eigen::Vector2d(0, 1)
                                     : Eigen::Vector2d(-x.y(), x.x());
    r.segment(2 * k, 2) = v;
  }
  return r;
}

}  // namespace

TEST_CASE("fundamental solution values") {
  CHECK(fundamental_solution(laplace(), Point(0, 0), Point(1, 0))(0, 0) == 0.0);
  const Eigen::MatrixXd g = fundamental_solution(lame(), Point(1, 0), Point(0, 0));
  CHECK(g(0, 0) == doctest::Approx(1.0 / (6.0 * kPi)).epsilon(1e-15));
  CHECK(std::abs(g(0, 1)) < 1e-16);
  CHECK(std::abs(g(1, 0)) < 1e-16);
  CHECK(std::abs(g(1, 1)) < 1e-16);
  const Point x(0.3, -0.2), y(-0.1, 0.45);
  CHECK((fundamental_solution(lame(2.0, 0.5), x, y) - fundamental_solution(lame(2.0, 0.5), y, x).transpose()).norm() < 1e-15);
  CHECK_THROWS(fundamental_solution(laplace(), x, x));
}

TEST_CASE("laplace single layer entries match an independent quadrature") {
  const BoundarySpace s(share(make_rectangle(0, 0, 0.5, 0.5, 4, 4)), 1);
  const auto ops = assemble_operators(s, laplace());
  const double a = s.panel_length(0);
  CHECK(ops.V(0, 0) == doctest::Approx(a * a / (2 * kPi) * (1.5 - std::log(a))).epsilon(1e-14));
  for (int j : {1, 2, 5, 9, 15}) CHECK(std::abs(ops.V(0, j) - laplace_v_entry(s, 0, j)) < 1e-10 * std::abs(ops.V(0, 0)));
  // congruent panels
  CHECK(ops.V(0, 0) == doctest::Approx(ops.V(7, 7)).epsilon(1e-14));
  CHECK(ops.V(3, 4) == doctest::Approx(ops.V(7, 8)).epsilon(1e-10));
}

TEST_CASE("operator entries are stable under quadrature increase") {
  const BoundarySpace s(share(make_lshape(0.6, 2)), 2);
  const auto a = assemble_operators(s, lame(1.0, 2.0), {8, false});
  const auto b = assemble_operators(s, lame(1.0, 2.0), {14, false});
  CHECK((a.V - b.V).cwiseAbs().maxCoeff() < 1e-8 * a.V.cwiseAbs().maxCoeff());
  CHECK((a.K - b.K).cwiseAbs().maxCoeff() < 1e-8 * a.K.cwiseAbs().maxCoeff());
  CHECK((a.W - b.W).cwiseAbs().maxCoeff() < 1e-8 * a.W.cwiseAbs().maxCoeff());
}

TEST_CASE("capacity scaling is required") {
  const BoundarySpace s(share(make_rectangle(0, 0, 1, 1, 2, 2)), 1);
  CHECK_THROWS_AS(assemble_operators(s, laplace()), std::invalid_argument);
}

TEST_CASE("double layer reproduces rigid motions") {
  const BoundarySpace sc(share(make_disk(0.4, 24, 2)), 1);
  const auto opc = assemble_operators(sc, laplace());
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(sc.linear_dofs());
  CHECK((opc.K * one + 0.5 * opc.M * one).norm() < 1e-8 * (opc.M * one).norm());

  const BoundarySpace sv(share(make_lshape(0.6, 3)), 2);
  const auto opv = assemble_operators(sv, lame(1.0, 3.0));
  for (int k = 0; k < 3; ++k) {
    const Eigen::VectorXd r = rigid_trace(sv, k);
    CHECK((opv.K * r + 0.5 * opv.M * r).norm() < 1e-8 * (opv.M * r).norm());
  }
}

TEST_CASE("V is positive definite and W has the rigid kernel") {
  for (auto coeffs : {laplace(), lame(), lame(0.5, 4.0)}) {
    const int c = coeffs.scalar ? 1 : 2;
    for (const Mesh& m : {make_rectangle(0, 0, 0.5, 0.5, 3, 3), make_disk(0.4, 32, 2)}) {
      const BoundarySpace s(share(m), c);
      const auto ops = assemble_operators(s, coeffs);
      CHECK((ops.V - ops.V.transpose()).norm() <= 1e-10 * ops.V.norm());
      CHECK((ops.W - ops.W.transpose()).norm() <= 1e-10 * ops.W.norm());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ev(ops.V);
      CHECK(ev.eigenvalues().minCoeff() > 0.0);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ew(ops.W);
      const int kernel = c == 1 ? 1 : 3;
      CHECK(ew.eigenvalues().minCoeff() > -1e-10 * ops.W.norm());
      CHECK(ew.eigenvalues()[kernel] > 1e-6 * ops.W.norm());
      for (int k = 0; k < kernel; ++k) {
        const Eigen::VectorXd r = c == 1 ? Eigen::VectorXd::Ones(s.linear_dofs()) : rigid_trace(s, k);
        CHECK((ops.W * r).norm() < 1e-9 * ops.W.norm() * r.norm());
      }
      CHECK((ops.S - ops.S.transpose()).norm() <= 1e-10 * ops.S.norm());
      CHECK(coercivity_constant(ops) > 0.0);
    }
  }
}

TEST_CASE("half factor halves S") {
  const BoundarySpace s(share(make_disk(0.4, 16, 1)), 1);
  const auto a = assemble_operators(s, laplace(), {8, false});
  const auto b = assemble_operators(s, laplace(), {8, true});
  CHECK((a.S - 2.0 * b.S).norm() < 1e-14 * a.S.norm());
}

TEST_CASE("steklov-poincare maps exterior traces to tractions") {
  // dipole fields decaying at infinity, sources inside the domain
  const Point x0(0.05, -0.03);
  auto scalar_u = [&](const Point& y) {
    const Point d = y - x0;
    return d.x() / (2 * kPi * d.squaredNorm());
  };
  auto scalar_grad = [&](const Point& y) {
    const Point d = y - x0;
    const double r2 = d.squaredNorm();
    return Point((r2 - 2 * d.x() * d.x()) / (2 * kPi * r2 * r2), -2 * d.x() * d.y() / (2 * kPi * r2 * r2));
  };
  const ExteriorCoefficients el = lame(1.0, 1.5);
  const Point x1(-0.06, 0.02);
  auto vector_u = [&](const Point& y) {
    Eigen::Vector2d c(0.3, 1.0);
    return Eigen::Vector2d(fundamental_solution(el, y, x0) * c - fundamental_solution(el, y, x1) * c);
  };
  auto vector_traction = [&](const Point& y, const Point& n) {
    const double h = 1e-6;
    Eigen::Matrix2d grad;
    for (int j = 0; j < 2; ++j) {
      Point e = Point::Zero();
      e[j] = h;
      grad.col(j) = (vector_u(y + e) - vector_u(y - e)) / (2 * h);
    }
    const Eigen::Matrix2d eps = 0.5 * (grad + grad.transpose());
    const Eigen::Matrix2d sigma = el.lambda * eps.trace() * Eigen::Matrix2d::Identity() + 2 * el.mu * eps;
    return Eigen::Vector2d(sigma * n);
  };
  for (int c : {1, 2}) {
    double prev = 1e300;
    for (int level = 0; level < 3; ++level) {
      const int seg = 16 << level;
      const BoundarySpace s(share(make_disk(0.4, seg, 1)), c);
      const auto ops = assemble_operators(s, c == 1 ? laplace() : el);
      Eigen::VectorXd trace(s.linear_dofs());
      for (int k = 0; k < s.num_nodes(); ++k) {
        if (c == 1) trace[k] = scalar_u(s.node(k));
        else trace.segment(2 * k, 2) = vector_u(s.node(k));
      }
      // reference: -<T u, phi_k> by Gauss on each panel
      Eigen::VectorXd ref = Eigen::VectorXd::Zero(s.linear_dofs());
      const double gp[3] = {0.1127016653792583, 0.5, 0.8872983346207417};
      const double gw[3] = {5.0 / 18, 8.0 / 18, 5.0 / 18};
      for (int e = 0; e < s.num_panels(); ++e) {
        const Point n = s.panel_normal(e);
        for (int q = 0; q < 3; ++q) {
          const Point y = s.panel_point(e, gp[q]);
          Eigen::VectorXd t(c);
          if (c == 1) t[0] = scalar_grad(y).dot(n);
          else t = vector_traction(y, n);
          const double w = gw[q] * s.panel_length(e);
          ref.segment(s.panel_start(e) * c, c) -= w * (1 - gp[q]) * t;
          ref.segment(s.panel_end(e) * c, c) -= w * gp[q] * t;
        }
      }
      const Eigen::VectorXd diff = ops.mass.llt().solve(ops.S * trace - ref);
      const Eigen::VectorXd refn = ops.mass.llt().solve(ref);
      const double err = std::sqrt(diff.dot(ops.mass * diff) / refn.dot(ops.mass * refn));
      CHECK(err < prev);
      prev = err;
    }
    CHECK(prev < 0.05);
  }
}

TEST_CASE("rigid body stabilization data") {
  const BoundarySpace sc(share(make_rectangle(0, 0, 0.5, 0.3, 3, 2)), 1);
  const auto oc = assemble_operators(sc, laplace());
  const auto rc = stabilization_data(sc, oc);
  CHECK(rc.dimension() == 1);
  for (int e = 0; e < sc.num_panels(); ++e) CHECK(rc.projections(e, 0) == doctest::Approx(1.0 / std::sqrt(1.6)));

  const BoundarySpace sv(share(make_lshape(0.6, 2)), 2);
  const auto ov = assemble_operators(sv, lame());
  const auto rv = stabilization_data(sv, ov);
  CHECK(rv.dimension() == 3);
  Eigen::VectorXd w(sv.constant_dofs());
  for (int e = 0; e < sv.num_panels(); ++e) w.segment(2 * e, 2).setConstant(sv.panel_length(e));
  const Eigen::MatrixXd gram = rv.projections.transpose() * w.asDiagonal() * rv.projections;
  CHECK((gram - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-12);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(rv.stabilization);
  const auto sv_ = svd.singularValues();
  CHECK(sv_[2] > 1e-8 * sv_[0]);
  CHECK(sv_[3] < 1e-12 * sv_[0]);
}

TEST_CASE("pointwise potentials are consistent with the Galerkin matrices") {
  const BoundarySpace s(share(make_lshape(0.6, 2)), 2);
  const ExteriorCoefficients el = lame(1.0, 2.0);
  const auto ops = assemble_operators(s, el);
  Eigen::VectorXd phi = Eigen::VectorXd::LinSpaced(s.constant_dofs(), -1.0, 2.0);
  Eigen::VectorXd w = Eigen::VectorXd::LinSpaced(s.linear_dofs(), 0.5, -0.7).array().sin();
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  for (int e : {0, 3, 7}) {
    Eigen::VectorXd vg(2), kg(2);
    for (int c = 0; c < 2; ++c) {
      vg[c] = s.panel_length(e) * GK::integrate([&](double t) { return single_layer_at(s, el, phi, e, t)[c]; }, 0.0, 1.0, 8, 1e-11);
      kg[c] = s.panel_length(e) * GK::integrate([&](double t) { return double_layer_at(s, el, w, e, t)[c]; }, 0.0, 1.0, 8, 1e-11);
    }
    const Eigen::VectorXd vref = ops.V.middleRows(2 * e, 2) * phi;
    const Eigen::VectorXd kref = ops.K.middleRows(2 * e, 2) * w;
    CHECK((vg - vref).norm() < 1e-8 * vref.norm());
    CHECK((kg - kref).norm() < 1e-8 * (kref.norm() + 1e-3));
  }
}
