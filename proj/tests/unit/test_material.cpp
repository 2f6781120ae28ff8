#include <doctest.h>

#include <cmath>
#include <random>

#include "febe/material.hpp"

using namespace febe;

namespace {

StrainValue vec(std::initializer_list<double> xs) {
  StrainValue v(static_cast<Eigen::Index>(xs.size()));
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

StrainValue random_in_ball(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  StrainValue x(dim);
  for (int i = 0; i < dim; ++i) x[i] = g(rng);
  return x / x.norm() * std::pow(u(rng), 1.0 / dim);
}

}  // namespace

TEST_CASE("stress closed forms") {
  const MaterialLaw p15(1.5);
  CHECK(p15.stress(vec({0, 0, 0})).norm() == 0.0);
  const MaterialLaw p2(2.0);
  const auto x = vec({0.3, -1.2, 0.7});
  CHECK((p2.stress(x) - x).norm() == 0.0);
  const MaterialLaw p3(3.0);
  const auto y = vec({2.0, 0.0, 0.0});
  CHECK((p3.stress(y) - 2.0 * y).norm() == doctest::Approx(0.0));
  const MaterialLaw carreau(1.5, LawKind::kCarreau, 1.0, LawMode::kVector);
  const auto s = carreau.stress(vec({1.0, 0.0}));
  CHECK(s[0] == doctest::Approx(std::pow(2.0, -0.25)).epsilon(1e-15));
  CHECK(s[1] == 0.0);
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_AS(MaterialLaw(1.0), std::invalid_argument);
  CHECK_THROWS_AS(MaterialLaw(2.0, LawKind::kCarreau, 1.5), std::invalid_argument);
  ExteriorCoefficients c{0.0, 1.0, false};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  ExteriorCoefficients d{1.0, -1.0, false};
  CHECK_THROWS_AS(d.validate(), std::invalid_argument);
  CHECK_THROWS_AS(parse_law_kind("bingham"), std::invalid_argument);
  CHECK(parse_law_kind("carreau") == LawKind::kCarreau);
}

TEST_CASE("tangent") {
  const MaterialLaw p2(2.0);
  CHECK((p2.tangent(vec({0.4, 0.1, 2.0})) - Eigen::MatrixXd::Identity(3, 3)).norm() == 0.0);
  const MaterialLaw p4(4.0, LawKind::kPLaplace, 0.0, LawMode::kVector);
  const auto t = p4.tangent(vec({1.0, 0.0}));
  CHECK(t(0, 0) == doctest::Approx(3.0));
  CHECK(t(1, 1) == doctest::Approx(1.0));
  CHECK(std::abs(t(0, 1)) < 1e-15);
  const MaterialLaw p15(1.5);
  CHECK_THROWS_AS(p15.tangent(vec({0, 0, 0}), true), SingularTangent);
  CHECK(p15.tangent(vec({0, 0, 0})).allFinite());
}

TEST_CASE("tangent matches central differences") {
  std::mt19937_64 rng(11);
  for (double p : {1.2, 1.5, 2.0, 3.0, 4.0}) {
    for (double delta : {0.0, 0.5, 1.0}) {
      const MaterialLaw law(p, LawKind::kCarreau, delta);
      for (int trial = 0; trial < 50; ++trial) {
        StrainValue x = random_in_ball(3, rng) * 3.0;
        if (x.norm() < 1e-2) continue;
        const StrainValue h = random_in_ball(3, rng);
        const double t = 1e-6 * x.norm();
        const StrainValue fd = (law.stress(x + t * h) - law.stress(x - t * h)) / (2 * t);
        const StrainValue an = law.tangent(x) * h;
        CHECK((fd - an).norm() <= 1e-6 * std::max(an.norm(), 1e-12) + 1e-9);
      }
    }
  }
}

TEST_CASE("carreau with delta 0 equals p-laplace") {
  std::mt19937_64 rng(5);
  for (double p : {1.2, 1.5, 3.0}) {
    const MaterialLaw a(p);
    const MaterialLaw b(p, LawKind::kCarreau, 0.0);
    for (int i = 0; i < 100; ++i) {
      const auto x = random_in_ball(3, rng) * 5.0;
      CHECK((a.stress(x) - b.stress(x)).norm() <= 1e-15 * (1.0 + a.stress(x).norm()));
    }
  }
}

TEST_CASE("potential derivative is the stress magnitude") {
  for (double p : {1.2, 1.5, 2.0, 3.0}) {
    for (double delta : {0.0, 0.3, 1.0}) {
      const MaterialLaw law(p, LawKind::kCarreau, delta);
      CHECK(law.potential(0.0) == 0.0);
      for (double s : {0.05, 0.4, 1.0, 2.5}) {
        const double h = 1e-5 * s;
        const double fd = (law.potential(s + h) - law.potential(s - h)) / (2 * h);
        CHECK(fd == doctest::Approx(law.stress_magnitude(s)).epsilon(1e-7));
      }
    }
  }
}

TEST_CASE("monotonicity gap") {
  const MaterialLaw p15(1.5);
  const auto x = vec({0.2, 0.1, -0.4});
  const auto g = monotonicity_gap(p15, x, x);
  CHECK(g.pairing == 0.0);
  CHECK(g.lower_bound == 0.0);
  CHECK(g.upper_bound == 0.0);
  const MaterialLaw p2(2.0);
  const auto y = vec({-0.5, 0.3, 0.0});
  CHECK(monotonicity_gap(p2, x, y).pairing == doctest::Approx((x - y).squaredNorm()));
  std::mt19937_64 rng(1);
  double ratio = 1e300;
  for (int i = 0; i < 10000; ++i) {
    const auto a = random_in_ball(3, rng);
    const auto b = random_in_ball(3, rng);
    const auto m = monotonicity_gap(p15, a, b);
    CHECK(m.pairing >= 0.0);
    if (m.lower_bound > 0.0) ratio = std::min(ratio, m.pairing / m.lower_bound);
  }
  CHECK(ratio > 0.0);
}
