#include "febe/material.hpp"

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace febe {

MaterialLaw::MaterialLaw(double p, LawKind kind, double delta, LawMode mode)
    : p_(p), kind_(kind), delta_(delta), mode_(mode) {
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("material: p must be > 1");
  if (!(delta >= 0.0 && delta <= 1.0)) throw std::invalid_argument("material: delta must lie in [0,1]");
}

double MaterialLaw::coefficient(double s) const {
  const double e = 0.5 * (p_ - 2.0);
  if (kind_ == LawKind::kPLaplace || delta_ == 0.0) return std::pow(s, p_ - 2.0);
  // (s^(2(1-d)) (1+s^2)^d)^e
  const double base_s = s == 0.0 && delta_ == 1.0 ? 1.0 : std::pow(s, 2.0 * (1.0 - delta_) * e);
  return base_s * std::pow(1.0 + s * s, delta_ * e);
}

double MaterialLaw::coefficient_derivative(double s) const {
  // d/ds log phi = a/s + b*2s/(1+s^2) with a = (p-2)(1-delta), b = delta (p-2)/2
  const double a = kind_ == LawKind::kPLaplace ? p_ - 2.0 : (p_ - 2.0) * (1.0 - delta_);
  const double b = kind_ == LawKind::kPLaplace ? 0.0 : 0.5 * delta_ * (p_ - 2.0);
  return coefficient(s) * (a / s + 2.0 * b * s / (1.0 + s * s));
}

double MaterialLaw::potential(double s) const {
  if (s <= 0.0) return 0.0;
  if (kind_ == LawKind::kPLaplace || delta_ == 0.0) return std::pow(s, p_) / p_;
  if (delta_ == 1.0 && p_ != 0.0) return (std::pow(1.0 + s * s, 0.5 * p_) - 1.0) / p_;
  // Psi(s) = int_0^s phi(t) t dt, substituted t = s u^2 to tame the origin.
  auto integrand = [&](double u) {
    const double t = s * u * u;
    return u == 0.0 ? 0.0 : coefficient(t) * t * 2.0 * s * u;
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, 1.0, 12, 1e-14);
}

StrainValue MaterialLaw::stress(const StrainValue& x) const {
  const double s = x.norm();
  if (s == 0.0) return StrainValue::Zero(x.size());
  return coefficient(s) * x;
}

Eigen::MatrixXd MaterialLaw::tangent(const StrainValue& x, bool strict) const {
  const int n = static_cast<int>(x.size());
  const double s = x.norm();
  if (p_ == 2.0 && (kind_ == LawKind::kPLaplace || delta_ == 0.0))
    return Eigen::MatrixXd::Identity(n, n);
  if (s < kSingularFloor && strict && p_ < 2.0)
    throw SingularTangent("material: tangent requested at |x| below the singular floor");
  if (s == 0.0) return coefficient(kSingularFloor) * Eigen::MatrixXd::Identity(n, n);
  const double se = std::max(s, kSingularFloor);
  const Eigen::VectorXd e = x / s;
  return coefficient(se) * Eigen::MatrixXd::Identity(n, n) +
         coefficient_derivative(se) * se * e * e.transpose();
}

MonotonicityGap monotonicity_gap(const MaterialLaw& law, const StrainValue& x,
                                 const StrainValue& y) {
  MonotonicityGap g;
  const StrainValue d = x - y;
  const double dn = d.norm();
  if (dn == 0.0) return g;
  const StrainValue ds = law.stress(x) - law.stress(y);
  g.pairing = ds.dot(d);
  g.stress_difference = ds.norm();
  const double sum = x.norm() + y.norm();
  const double p = law.p();
  if (p < 2.0) {
    g.lower_bound = std::pow(sum, p - 2.0) * dn * dn;
    g.upper_bound = std::pow(dn, p - 1.0);
  } else {
    g.lower_bound = std::pow(dn, p);
    g.upper_bound = std::pow(sum, p - 2.0) * dn;
  }
  return g;
}

void ExteriorCoefficients::validate() const {
  if (!(mu > 0.0)) throw std::invalid_argument("exterior.mu must be > 0");
  if (!(lambda > -mu)) throw std::invalid_argument("exterior.lambda must be > -mu");
}

LawKind parse_law_kind(const std::string& name) {
  if (name == "plaplace" || name == "p-laplace" || name == "PLAPLACE") return LawKind::kPLaplace;
  if (name == "carreau" || name == "CARREAU") return LawKind::kCarreau;
  throw std::invalid_argument("material.kind: unknown law '" + name + "'");
}

std::string law_kind_name(LawKind kind) {
  return kind == LawKind::kPLaplace ? "plaplace" : "carreau";
}

}  // namespace febe
