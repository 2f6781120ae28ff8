#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "febe/estimate.hpp"
#include "febe/quadrature.hpp"

using namespace febe;

namespace {

const BoundaryLabel S = BoundaryLabel::kSlip;
const BoundaryLabel T = BoundaryLabel::kTransmission;

std::shared_ptr<const Mesh> square(int n, std::vector<BoundaryLabel> labels = {}) {
  return std::make_shared<const Mesh>(make_rectangle(0, 0, 0.5, 0.5, n, n, labels));
}

ProblemData scalar_data(const CoupledSpaces& sp) {
  return make_problem_data(
      sp, [](const Point& x) { return Vector::Constant(1, 1.0 + x.x()); },
      [](const Point& x) { return Vector::Constant(1, 0.2 * x.y()); },
      [](const Point& x, const Point&, int) { return Vector::Constant(1, 0.3 - x.x()); });
}

ProblemData vector_data(const CoupledSpaces& sp) {
  return make_problem_data(
      sp, [](const Point& x) { return Vector(Eigen::Vector2d(0.5 * x.y(), 0.6 - 4.0 * x.x())); },
      [](const Point& x) { return Vector(Eigen::Vector2d(0.05 * x.x(), 0.02)); },
      [](const Point& x, const Point& n, int) { return Vector(0.2 * n + Eigen::Vector2d(0.1 * x.y(), 0.0)); });
}

double l2_gradient_error(const FESpace& fe, const std::function<Eigen::MatrixXd(int, const std::array<double, 3>&)>& g,
                         const std::function<Eigen::Vector2d(const Point&)>& exact) {
  const Mesh& m = fe.mesh();
  const auto& rule = triangle_rule(5);
  double acc = 0.0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tr = m.triangles()[t];
    for (std::size_t k = 0; k < rule.weights.size(); ++k) {
      const auto& b = rule.barycentric[k];
      const Point x = b[0] * m.vertices()[tr[0]] + b[1] * m.vertices()[tr[1]] + b[2] * m.vertices()[tr[2]];
      const Eigen::Vector2d d = g(t, b).row(0).transpose() - exact(x);
      acc += 2.0 * m.area(t) * rule.weights[k] * d.squaredNorm();
    }
  }
  return std::sqrt(acc);
}

}  // namespace

TEST_CASE("gradient recovery is exact on linear fields") {
  auto sp = make_spaces(square(3), {1.0, 1.0, true});
  const Vector u = interpolate(sp.fe, [](const Point& x) { return Vector::Constant(1, 2.0 * x.x() - 3.0 * x.y() + 1.0); });
  const auto rg = recover_gradient(sp.fe, u);
  for (int v = 0; v < sp.mesh->num_vertices(); ++v) {
    CHECK(rg.nodal(v, 0) == doctest::Approx(2.0));
    CHECK(rg.nodal(v, 1) == doctest::Approx(-3.0));
  }
}

TEST_CASE("gradient recovery on a single element returns the element gradient") {
  auto mesh = std::make_shared<const Mesh>(load_mesh("3 1 3\n0 0\n0.4 0\n0 0.3\n0 1 2\n0 1 T\n1 2 T\n2 0 T\n"));
  FESpace fe(mesh, 1);
  const Vector u = (Vector(3) << 0.1, 0.7, -0.2).finished();
  const auto rg = recover_gradient(fe, u);
  const Eigen::MatrixXd g = fe.element_gradient(0, u);
  for (int v = 0; v < 3; ++v) {
    CHECK(rg.nodal(v, 0) == doctest::Approx(g(0, 0)));
    CHECK(rg.nodal(v, 1) == doctest::Approx(g(0, 1)));
  }
}

TEST_CASE("recovered gradient is closer to the exact gradient of a quadratic") {
  auto mesh = std::make_shared<const Mesh>(make_rectangle(0, 0, 1, 1, 8, 8));
  FESpace fe(mesh, 1);
  const Vector u = interpolate(fe, [](const Point& x) { return Vector::Constant(1, x.x() * x.x() + 0.5 * x.x() * x.y()); });
  auto exact = [](const Point& x) { return Eigen::Vector2d(2.0 * x.x() + 0.5 * x.y(), 0.5 * x.x()); };
  const auto rg = recover_gradient(fe, u);
  const double raw = l2_gradient_error(fe, [&](int t, const std::array<double, 3>&) { return fe.element_gradient(t, u); }, exact);
  const double rec = l2_gradient_error(fe, [&](int t, const std::array<double, 3>& b) { return rg.at(*mesh, t, b); }, exact);
  CHECK(rec < raw);
}

TEST_CASE("quasi-norm kernel") {
  CHECK(quasi_norm_kernel(2.0, 0.0, 3.0, 0.5) == doctest::Approx(0.25));
  CHECK(quasi_norm_kernel(3.0, 1.0, 1.0, 2.0) == doctest::Approx(4.0 * 4.0));
  CHECK(quasi_norm_kernel(3.0, 1.0, 1.0, 0.0) == 0.0);
}

TEST_CASE("recovery estimator vanishing terms") {
  auto sp = make_spaces(square(4, {S, T, T, T}), {1.0, 1.0, true});
  const MaterialLaw law(3.0, LawKind::kPLaplace, 0.0, LawMode::kVector);
  const auto fr = make_friction(sp, [](const Point&) { return 0.1; });
  const auto data = make_problem_data(
      sp, [](const Point&) { return Vector::Constant(1, 2.0); }, [](const Point&) { return Vector::Constant(1, 0.0); },
      [](const Point&, const Point&, int) { return Vector::Constant(1, 0.0); });
  DiscreteSolution sol;
  sol.u = interpolate(sp.fe, [](const Point& x) { return Vector::Constant(1, x.x() - 2.0 * x.y()); });
  sol.v = Vector::Zero(sp.num_slip());
  const auto est = estimate_scalar_recovery(sp, law, data, fr, sol);
  CHECK(est.term("gradient_recovery").total() < 1e-24);
  CHECK(est.term("data_oscillation").total() < 1e-24);
  CHECK_THROWS_AS(estimate_scalar_recovery(sp, MaterialLaw(1.5, LawKind::kPLaplace, 0.0, LawMode::kVector), data, fr, sol),
                  std::invalid_argument);
}

TEST_CASE("recovery estimator gradient term reduces to the L2 recovery error for p = 2") {
  auto sp = make_spaces(square(4), {1.0, 1.0, true});
  const MaterialLaw law(2.0, LawKind::kPLaplace, 0.0, LawMode::kVector);
  const auto data = scalar_data(sp);
  const auto sol = solve_transmission(sp, law, data);
  const auto est = estimate_scalar_recovery(sp, law, data, FrictionData{}, sol);
  const auto rg = recover_gradient(sp.fe, sol.u);
  const auto& rule = triangle_rule(4);
  double acc = 0.0;
  for (int t = 0; t < sp.mesh->num_triangles(); ++t) {
    const Eigen::MatrixXd g = sp.fe.element_gradient(t, sol.u);
    for (std::size_t k = 0; k < rule.weights.size(); ++k)
      acc += 2.0 * sp.mesh->area(t) * rule.weights[k] * (g - rg.at(*sp.mesh, t, rule.barycentric[k])).squaredNorm();
  }
  CHECK(est.term("gradient_recovery").total() == doctest::Approx(acc).epsilon(1e-12));
}

TEST_CASE("zero data and zero solution give a zero estimator") {
  auto sp = make_spaces(square(3, {S, S, T, T}), {1.0, 1.0, false});
  const MaterialLaw law(2.0);
  const auto data = zero_data(sp);
  const auto fr = make_friction(sp, [](const Point&) { return 0.1; });
  const auto sol = solve_layerpotential_vi(sp, law, data, fr, true);
  CHECK(estimate_lp(sp, law, data, fr, sol).total() == 0.0);
  CHECK(estimate_sp(sp, law, data, fr, sol).total() == 0.0);
}

TEST_CASE("estimator terms are nonnegative and merge onto elements") {
  auto sp = make_spaces(square(4, {S, S, T, T}), {1.0, 1.0, false});
  const MaterialLaw law(2.5);
  const auto data = vector_data(sp);
  const auto fr = make_friction(sp, [](const Point& x) { return 0.005 + 0.04 * x.x(); });
  const auto sol = solve_contact_vi(sp, law, data, fr);
  const auto est = estimate_sp(sp, law, data, fr, sol);
  double local = 0.0;
  for (const auto& t : est.terms) {
    CHECK(t.local.minCoeff() >= 0.0);
    local += t.local.sum();
  }
  CHECK(est.element_indicators(*sp.mesh).sum() == doctest::Approx(local).epsilon(1e-12));
  CHECK(est.has("normal_positive"));
  CHECK(est.total() > 0.0);
}

TEST_CASE("stick-slip term vanishes on a full-stick solution") {
  auto sp = make_spaces(square(4, {S, T, T, T}), {1.0, 1.0, false});
  const MaterialLaw law(2.0);
  const auto data = make_problem_data(
      sp, [](const Point&) { return Vector(Eigen::Vector2d(0.2, 0.0)); }, [](const Point&) { return Vector(Vector::Zero(2)); },
      [](const Point& x, const Point& n, int) { return Vector(0.5 * n + Eigen::Vector2d(0.1 * x.y(), 0.0)); });
  const auto fr = make_friction(sp, [](const Point&) { return 1e3; });
  const auto sol = solve_contact_vi(sp, law, data, fr);
  for (int i = 0; i < sp.num_slip(); ++i) CHECK(sol.v[2 * i + 1] == 0.0);
  const auto est = estimate_sp(sp, law, data, fr, sol);
  CHECK(est.term("stick_slip").total() <= 1e-8);
  CHECK(est.term("normal_complementarity").total() <= 1e-8);
}

TEST_CASE("perturbing the discrete solution increases the estimator") {
  auto sp = make_spaces(square(4, {S, T, T, T}), {1.0, 1.0, true});
  const MaterialLaw law(2.0, LawKind::kPLaplace, 0.0, LawMode::kVector);
  const auto data = scalar_data(sp);
  const auto fr = make_friction(sp, [](const Point&) { return 0.05; });
  const auto sol = solve_contact_vi(sp, law, data, fr);
  const double base = estimate_sp(sp, law, data, fr, sol).total();
  std::mt19937 rng(1);
  std::normal_distribution<double> d(0.0, 1.0);
  for (int k = 0; k < 5; ++k) {
    DiscreteSolution p = sol;
    for (auto& x : p.u) x += 0.05 * d(rng);
    CHECK(estimate_sp(sp, law, data, fr, p).total() > base);
  }
}

TEST_CASE("layer potential and Steklov estimators are comparable") {
  for (int n : {2, 4, 8}) {
    auto sp = make_spaces(square(n, {S, S, T, T}), {1.0, 1.0, false});
    const MaterialLaw law(2.0);
    const auto data = vector_data(sp);
    const auto fr = make_friction(sp, [](const Point& x) { return 0.005 + 0.04 * x.x(); });
    const auto a = solve_contact_vi(sp, law, data, fr);
    const auto b = solve_layerpotential_vi(sp, law, data, fr, true);
    const double ea = estimate_sp(sp, law, data, fr, a).total();
    const double eb = estimate_lp(sp, law, data, fr, b).total();
    CHECK(ea / eb <= 10.0);
    CHECK(eb / ea <= 10.0);
  }
}

TEST_CASE("consistency term is smallest at the discrete density") {
  auto sp = make_spaces(square(4), {1.0, 1.0, true});
  const MaterialLaw law(2.0, LawKind::kPLaplace, 0.0, LawMode::kVector);
  const auto data = scalar_data(sp);
  const auto sol = solve_layerpotential_vi(sp, law, data, FrictionData{}, false);
  const double base = estimate_lp(sp, law, data, FrictionData{}, sol).term("consistency").total();
  DiscreteSolution p = sol;
  p.phi.array() += 0.1 * p.phi.cwiseAbs().maxCoeff();
  CHECK(estimate_lp(sp, law, data, FrictionData{}, p).term("consistency").total() > base);
  CHECK_THROWS_AS(estimate_lp(sp, law, data, FrictionData{}, solve_transmission(sp, law, data)), std::invalid_argument);
}
