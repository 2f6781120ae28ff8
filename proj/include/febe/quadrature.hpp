#pragma once

#include <array>
#include <vector>

namespace febe {

/// Symmetric rule on the reference triangle {(x,y): x,y >= 0, x+y <= 1}.
/// Weights sum to the reference area 1/2.
struct TriangleRule {
  int order = 0;  // polynomial degree integrated exactly
  std::vector<std::array<double, 3>> barycentric;
  std::vector<double> weights;
};

/// Smallest tabulated rule exact to at least `order` (1..6).
const TriangleRule& triangle_rule(int order);

/// Gauss-Legendre rule on [0, 1].
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
};

const LineRule& gauss_legendre(int n);

/// Composite Gauss rule on [0, 1] geometrically graded towards 0:
/// subintervals [0, s^L], [s^L, s^(L-1)], ..., [s, 1] with n points each.
LineRule graded_gauss(int n, int levels, double ratio = 0.15);

}  // namespace febe
