#include "febe/presets.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace febe {

namespace {

const BoundaryLabel kS = BoundaryLabel::kSlip;
const BoundaryLabel kT = BoundaryLabel::kTransmission;

Vector vec(double a) { return Vector::Constant(1, a); }
Vector vec(double a, double b) { return Vector(Eigen::Vector2d(a, b)); }

Eigen::MatrixXd row(double a, double b) {
  Eigen::MatrixXd g(1, 2);
  g << a, b;
  return g;
}

Eigen::MatrixXd mat(double a, double b, double c, double d) {
  Eigen::MatrixXd g(2, 2);
  g << a, b, c, d;
  return g;
}

constexpr double kCornerAlpha = 2.0 / 3.0;

// polar coordinates around the reentrant corner of make_lshape(0.6, n),
// angle measured from the upper reentrant edge
void corner_polar(const Point& x, double& r, double& th) {
  const Point d = x - Point(0.3, 0.3);
  r = d.norm();
  th = std::atan2(d.y(), d.x()) - std::numbers::pi / 2.0;
  if (th < 0.0) th += 2.0 * std::numbers::pi;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"linear", "smooth", "lshape", "stick_slip", "vector_smooth", "full_stick", "vector_contact"};
}

int preset_components(const std::string& name) {
  if (name == "vector_smooth" || name == "full_stick" || name == "vector_contact") return 2;
  for (const auto& n : preset_names())
    if (n == name) return 1;
  throw std::invalid_argument("unknown preset '" + name + "'");
}

Preset manufactured(std::string name, int components, Mesh mesh, const MaterialLaw& law, VectorField u,
                    MatrixField grad, VectorField f) {
  Preset p;
  p.name = std::move(name);
  p.components = components;
  p.mesh = std::move(mesh);
  auto stress = [law, grad, components](const Point& x) {
    return stress_tensor(law.stress(strain_from_gradient(grad(x))), components);
  };
  if (f) {
    p.f = std::move(f);
  } else {
    p.f = [stress, components](const Point& x) {
      const double h = 1e-5;
      Vector out = Vector::Zero(components);
      for (int j = 0; j < 2; ++j) {
        Point e = Point::Zero();
        e[j] = h;
        out -= (stress(x + e).col(j) - stress(x - e).col(j)) / (2.0 * h);
      }
      return out;
    };
  }
  p.u0 = u;
  p.t0 = [stress](const Point& x, const Point& n, int) { return Vector(stress(x) * n); };
  p.exact = std::move(u);
  p.exact_gradient = std::move(grad);
  return p;
}

Preset make_preset(const std::string& name, const MaterialLaw& law) {
  if (name == "linear") {
    return manufactured(
        name, 1, make_rectangle(0, 0, 0.5, 0.5, 2, 2), law, [](const Point& x) { return vec(0.3 + x.x() - 0.5 * x.y()); },
        [](const Point&) { return row(1.0, -0.5); }, [](const Point&) { return vec(0.0); });
  }
  if (name == "smooth") {
    return manufactured(
        name, 1, make_rectangle(0, 0, 0.5, 0.5, 2, 2), law,
        [](const Point& x) { return vec(std::sin(3 * x.x()) * std::cos(2 * x.y()) + 0.5 * x.x() * x.y()); },
        [](const Point& x) {
          return row(3 * std::cos(3 * x.x()) * std::cos(2 * x.y()) + 0.5 * x.y(),
                     -2 * std::sin(3 * x.x()) * std::sin(2 * x.y()) + 0.5 * x.x());
        });
  }
  if (name == "lshape") {
    const double a = kCornerAlpha;
    auto u = [a](const Point& x) {
      double r, th;
      corner_polar(x, r, th);
      return vec(std::pow(r, a) * std::sin(a * th));
    };
    auto grad = [a](const Point& x) {
      double r, th;
      corner_polar(x, r, th);
      if (r == 0.0) return row(0.0, 0.0);
      // polar angle of x - corner is th + pi/2
      const double phi = th + std::numbers::pi / 2.0;
      const double ur = a * std::pow(r, a - 1.0) * std::sin(a * th);
      const double ut = a * std::pow(r, a - 1.0) * std::cos(a * th);  // (1/r) du/dth
      return row(ur * std::cos(phi) - ut * std::sin(phi), ur * std::sin(phi) + ut * std::cos(phi));
    };
    VectorField f = nullptr;
    if (law.kind() == LawKind::kPLaplace) {
      // |grad u| = a r^(a-1) is radial, so -div(|grad u|^(p-2) grad u) = -g'(r) du/dr
      const double p = law.p();
      f = [a, p](const Point& x) {
        double r, th;
        corner_polar(x, r, th);
        if (p == 2.0 || r == 0.0) return vec(0.0);
        const double e = (a - 1.0) * (p - 2.0);
        const double gp = std::pow(a, p - 2.0) * e * std::pow(r, e - 1.0);
        return vec(-gp * a * std::pow(r, a - 1.0) * std::sin(a * th));
      };
    }
    return manufactured(name, 1, make_lshape(0.6, 1), law, u, grad, f);
  }
  if (name == "vector_smooth") {
    return manufactured(
        name, 2, make_rectangle(0, 0, 0.5, 0.5, 2, 2), law,
        [](const Point& x) {
          return vec(0.1 * std::sin(3 * x.x()) * std::cos(2 * x.y()), 0.1 * (std::cos(x.x()) * std::sin(2 * x.y()) + x.x() * x.y()));
        },
        [](const Point& x) {
          return mat(0.3 * std::cos(3 * x.x()) * std::cos(2 * x.y()), -0.2 * std::sin(3 * x.x()) * std::sin(2 * x.y()),
                     0.1 * (-std::sin(x.x()) * std::sin(2 * x.y()) + x.y()), 0.1 * (2 * std::cos(x.x()) * std::cos(2 * x.y()) + x.x()));
        });
  }
  if (name == "full_stick") {
    // tensile normal strain on the slip boundary, dominant friction bound
    Preset p = manufactured(
        name, 2, make_rectangle(0, 0, 0.5, 0.5, 4, 4, {kS, kT, kT, kT}), law,
        [](const Point& x) { return vec(0.1 * x.x() * x.x(), 0.2 * x.y() + 0.05 * x.x() * x.y()); },
        [](const Point& x) { return mat(0.2 * x.x(), 0.0, 0.05 * x.y(), 0.2 + 0.05 * x.x()); });
    p.friction = [](const Point&) { return 1e3; };
    return p;
  }
  if (name == "vector_contact") {
    Preset p;
    p.name = name;
    p.components = 2;
    p.mesh = make_rectangle(0, 0, 0.5, 0.5, 3, 3, {kS, kS, kT, kT});
    p.f = [](const Point& x) { return vec(0.5 * x.y(), 0.6 - 4.0 * x.x()); };
    p.u0 = [](const Point& x) { return vec(0.05 * x.x(), 0.02); };
    p.t0 = [](const Point& x, const Point& n, int) { return Vector(0.2 * n + Eigen::Vector2d(0.1 * x.y(), 0.0)); };
    p.friction = [](const Point& x) { return 0.005 + 0.04 * x.x(); };
    return p;
  }
  if (name == "stick_slip") {
    // Linear field with unit shear on the slip side; the bound drops below
    // the shear only on a short patch, so all other data are exact.
    Preset p = manufactured(
        name, 1, make_rectangle(0, 0, 0.5, 0.5, 4, 4, {kS, kT, kT, kT}), law,
        [](const Point& x) { return vec(x.y()); }, [](const Point&) { return row(0.0, 1.0); },
        [](const Point&) { return vec(0.0); });
    const double shear = law.stress_magnitude(1.0);
    p.friction = [shear](const Point& x) { return shear * (0.7 + 12.0 * std::abs(x.x() - 0.25)); };
    p.exact.reset();
    p.exact_gradient = nullptr;
    return p;
  }
  throw std::invalid_argument("unknown preset '" + name + "'");
}

void shift_data(Preset& preset, double f_offset, double t0_offset) {
  if (f_offset == 0.0 && t0_offset == 0.0) return;
  auto f = preset.f;
  auto t0 = preset.t0;
  preset.f = [f, f_offset](const Point& x) { return Vector(f(x).array() + f_offset); };
  preset.t0 = [t0, t0_offset](const Point& x, const Point& n, int e) { return Vector(t0(x, n, e).array() + t0_offset); };
  preset.exact.reset();
  preset.exact_gradient = nullptr;
}

}  // namespace febe
