#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "febe/oracle.hpp"

using namespace febe;

namespace {

const BoundaryLabel S = BoundaryLabel::kSlip;
const BoundaryLabel T = BoundaryLabel::kTransmission;

std::shared_ptr<const Mesh> square(int n, std::vector<BoundaryLabel> labels) {
  return std::make_shared<const Mesh>(make_rectangle(0, 0, 0.5, 0.5, n, n, labels));
}

ProblemData random_vector_data(const CoupledSpaces& sp, std::mt19937& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  const Eigen::Vector2d f0(d(rng), d(rng)), f1(d(rng), d(rng)), g(d(rng), d(rng));
  const double pn = 0.3 * d(rng), u0s = 0.1 * d(rng);
  return make_problem_data(
      sp, [=](const Point& x) { return Vector(f0 + 4.0 * x.x() * f1); },
      [=](const Point& x) { return Vector(u0s * Eigen::Vector2d(x.y(), 1.0)); },
      [=](const Point& x, const Point& n, int) { return Vector(pn * n + 0.2 * x.x() * g); });
}

}  // namespace

TEST_CASE("oracle without constraints matches the transmission solve") {
  auto sp = make_spaces(square(3, {S, T, T, T}), {1.0, 1.0, true});
  const MaterialLaw law(2.0, LawKind::kPLaplace, 0.0, LawMode::kVector);
  const auto data = make_problem_data(
      sp, [](const Point& x) { return Vector::Constant(1, x.y()); },
      [](const Point&) { return Vector::Constant(1, 0.1); },
      [](const Point& x, const Point&, int) { return Vector::Constant(1, x.x() - 0.2); });
  const auto fr = make_friction(sp, [](const Point&) { return 0.0; });
  const auto o = oracle_vi(sp, law, data, fr);
  const auto t = solve_transmission(sp, law, data);
  CHECK(o.exact);
  CHECK((o.u - t.u).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((o.v - t.v).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("oracle gives stick for a dominant friction bound") {
  auto sp = make_spaces(square(2, {S, T, T, T}), {1.0, 1.0, false});
  REQUIRE(sp.num_slip() == 1);
  const MaterialLaw law(2.0);
  std::mt19937 rng(3);
  const auto data = random_vector_data(sp, rng);
  const auto fr = make_friction(sp, [](const Point&) { return 1e4; });
  const auto o = oracle_vi(sp, law, data, fr);
  CHECK(o.v[1] == 0.0);
  CHECK(o.stick_slip[0] == 0);
}

TEST_CASE("oracle rejects large instances") {
  auto sp = make_spaces(square(4, {S, S, T, T}), {1.0, 1.0, false});
  const auto fr = make_friction(sp, [](const Point&) { return 0.1; });
  CHECK_THROWS_AS(oracle_vi(sp, MaterialLaw(2.0), zero_data(sp), fr), std::invalid_argument);
}

TEST_CASE("solver matches the enumeration oracle on random instances") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  for (int trial = 0; trial < 6; ++trial) {
    auto sp = make_spaces(square(trial % 2 ? 3 : 4, {S, T, T, T}), {0.5 + d(rng), 0.5 + d(rng), false});
    const MaterialLaw law(2.0);
    const auto data = random_vector_data(sp, rng);
    const double level = 0.2 * d(rng);
    const auto fr = make_friction(sp, [level](const Point& x) { return level * (0.5 + 2.0 * x.x()); });
    const auto o = oracle_vi(sp, law, data, fr);
    const auto s = solve_contact_vi(sp, law, data, fr);
    CHECK(std::abs(o.objective - s.objective) <= 1e-8 * (1.0 + std::abs(o.objective)));
    CHECK(o.stick_slip == stick_slip_pattern(sp, s.v, 1e-10));
  }
}

TEST_CASE("subgradient oracle bounds the solver objective from above") {
  auto sp = make_spaces(square(2, {S, T, T, T}), {1.0, 1.0, false});
  const MaterialLaw law(3.0);
  std::mt19937 rng(5);
  const auto data = random_vector_data(sp, rng);
  const auto fr = make_friction(sp, [](const Point&) { return 0.05; });
  OracleOptions opt;
  opt.subgradient_iters = 20000;
  const auto o = oracle_vi(sp, law, data, fr, opt);
  const auto s = solve_contact_vi(sp, law, data, fr);
  CHECK_FALSE(o.exact);
  CHECK(o.objective >= s.objective - 1e-12);
  CHECK(o.objective - s.objective < 1e-4 * (1.0 + std::abs(s.objective)));
}
