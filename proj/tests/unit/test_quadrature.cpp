#include <doctest.h>

#include <cmath>

#include "febe/quadrature.hpp"

using namespace febe;

namespace {

// int over reference triangle of x^i y^j = i! j! / (i + j + 2)!
double monomial_exact(int i, int j) {
  return std::tgamma(i + 1) * std::tgamma(j + 1) / std::tgamma(i + j + 3);
}

}  // namespace

TEST_CASE("triangle rules integrate monomials exactly") {
  for (int order = 1; order <= 6; ++order) {
    const auto& rule = triangle_rule(order);
    CHECK(rule.order >= order);
    double wsum = 0.0;
    for (double w : rule.weights) {
      CHECK(w > 0.0);
      wsum += w;
    }
    CHECK(wsum == doctest::Approx(0.5).epsilon(1e-14));
    for (int i = 0; i <= rule.order; ++i) {
      for (int j = 0; i + j <= rule.order; ++j) {
        double q = 0.0;
        for (std::size_t k = 0; k < rule.weights.size(); ++k) {
          const double x = rule.barycentric[k][1];
          const double y = rule.barycentric[k][2];
          q += rule.weights[k] * std::pow(x, i) * std::pow(y, j);
        }
        CHECK(q == doctest::Approx(monomial_exact(i, j)).epsilon(1e-13));
      }
    }
  }
  CHECK_THROWS(triangle_rule(0));
  CHECK_THROWS(triangle_rule(7));
}

TEST_CASE("gauss legendre on [0,1]") {
  for (int n : {1, 2, 5, 12, 40}) {
    const auto& r = gauss_legendre(n);
    for (int d = 0; d < 2 * n; ++d) {
      double q = 0.0;
      for (int k = 0; k < n; ++k) q += r.weights[k] * std::pow(r.points[k], d);
      CHECK(q == doctest::Approx(1.0 / (d + 1)).epsilon(1e-13));
    }
  }
}

TEST_CASE("graded gauss resolves a log singularity") {
  const auto r = graded_gauss(12, 24, 0.25);
  double q = 0.0;
  for (std::size_t k = 0; k < r.points.size(); ++k) q += r.weights[k] * std::log(r.points[k]);
  CHECK(std::abs(q + 1.0) < 1e-12);
}
