#include "febe/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace febe {

namespace {

void add_orbit3(TriangleRule& r, double a, double b, double w) {
  r.barycentric.push_back({a, b, b});
  r.barycentric.push_back({b, a, b});
  r.barycentric.push_back({b, b, a});
  for (int i = 0; i < 3; ++i) r.weights.push_back(0.5 * w);
}

void add_orbit6(TriangleRule& r, double a, double b, double c, double w) {
  const std::array<std::array<double, 3>, 6> perms{{{a, b, c}, {a, c, b}, {b, a, c},
                                                    {b, c, a}, {c, a, b}, {c, b, a}}};
  for (const auto& p : perms) {
    r.barycentric.push_back(p);
    r.weights.push_back(0.5 * w);
  }
}

std::vector<TriangleRule> build_rules() {
  std::vector<TriangleRule> rules;
  TriangleRule r1{1, {{1.0 / 3, 1.0 / 3, 1.0 / 3}}, {0.5}};
  rules.push_back(r1);

  TriangleRule r2;
  r2.order = 2;
  add_orbit3(r2, 2.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0);
  rules.push_back(r2);

  TriangleRule r4;  // Dunavant degree 4, 6 points
  r4.order = 4;
  add_orbit3(r4, 0.108103018168070, 0.445948490915965, 0.223381589678011);
  add_orbit3(r4, 0.816847572980459, 0.091576213509771, 0.109951743655322);
  rules.push_back(r4);

  TriangleRule r5;  // degree 5, 7 points
  r5.order = 5;
  r5.barycentric.push_back({1.0 / 3, 1.0 / 3, 1.0 / 3});
  r5.weights.push_back(0.5 * 0.225);
  const double s15 = std::sqrt(15.0);
  add_orbit3(r5, (9.0 - 2.0 * s15) / 21.0, (6.0 + s15) / 21.0, (155.0 + s15) / 1200.0);
  add_orbit3(r5, (9.0 + 2.0 * s15) / 21.0, (6.0 - s15) / 21.0, (155.0 - s15) / 1200.0);
  rules.push_back(r5);

  TriangleRule r6;  // Dunavant degree 6, 12 points
  r6.order = 6;
  add_orbit3(r6, 0.501426509658179, 0.249286745170910, 0.116786275726379);
  add_orbit3(r6, 0.873821971016996, 0.063089014491502, 0.050844906370207);
  add_orbit6(r6, 0.053145049844817, 0.310352451033784, 0.636502499121399, 0.082851075618374);
  rules.push_back(r6);
  return rules;
}

LineRule compute_gauss_legendre(int n) {
  LineRule r;
  r.points.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at converged node
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n == 1 ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
    r.points[n - 1 - i] = 0.5 * (x + 1.0);
    r.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

}  // namespace

const TriangleRule& triangle_rule(int order) {
  static const std::vector<TriangleRule> rules = build_rules();
  if (order < 1 || order > 6) throw std::invalid_argument("triangle_rule: order must lie in 1..6");
  for (const auto& r : rules)
    if (r.order >= order) return r;
  return rules.back();
}

const LineRule& gauss_legendre(int n) {
  if (n < 1 || n > 256) throw std::invalid_argument("gauss_legendre: n must lie in 1..256");
  static std::mutex m;
  static std::map<int, LineRule> cache;
  std::lock_guard lock(m);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

LineRule graded_gauss(int n, int levels, double ratio) {
  const LineRule& g = gauss_legendre(n);
  LineRule out;
  double lo = 0.0;
  for (int l = levels; l >= 0; --l) {
    const double hi = std::pow(ratio, l);
    for (std::size_t i = 0; i < g.points.size(); ++i) {
      out.points.push_back(lo + (hi - lo) * g.points[i]);
      out.weights.push_back((hi - lo) * g.weights[i]);
    }
    lo = hi;
  }
  return out;
}

}  // namespace febe
