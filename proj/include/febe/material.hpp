#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace febe {

enum class LawKind { kPLaplace, kCarreau };
enum class LawMode { kMatrix, kVector };

class SingularTangent : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Strain (matrix mode) or gradient (vector mode) value. Symmetric 2x2
/// matrices are held in orthonormal coordinates (e11, e22, sqrt(2) e12) so that
/// the Euclidean product equals the Frobenius product.
using StrainValue = Eigen::VectorXd;

/// Radial constitutive law A'(x) = phi(|x|) x.
///
/// p-Laplacian: phi(s) = s^(p-2).
/// Carreau:     phi(s) = (s^(2(1-delta)) (1+s^2)^delta)^((p-2)/2),
/// which reduces to the p-Laplacian at delta = 0.
class MaterialLaw {
 public:
  MaterialLaw(double p, LawKind kind = LawKind::kPLaplace, double delta = 0.0,
              LawMode mode = LawMode::kMatrix);

  double p() const { return p_; }
  LawKind kind() const { return kind_; }
  double delta() const { return delta_; }
  LawMode mode() const { return mode_; }
  /// 3 in matrix mode, 2 in vector mode.
  int dimension() const { return mode_ == LawMode::kMatrix ? 3 : 2; }

  double conjugate() const { return p_ / (p_ - 1.0); }  // p'
  double r() const { return p_ < 2.0 ? p_ : 2.0; }
  double q() const { return p_ > 2.0 ? p_ : 2.0; }

  /// phi(s) with the continuous extension phi(0)*0 = 0 handled by callers.
  double coefficient(double s) const;
  /// d phi / ds.
  double coefficient_derivative(double s) const;
  /// Potential Psi with Psi'(s) = phi(s) s, Psi(0) = 0.
  double potential(double s) const;

  StrainValue stress(const StrainValue& x) const;
  double stress_magnitude(double s) const { return s == 0.0 ? 0.0 : coefficient(s) * s; }

  /// Frechet derivative of stress. For p < 2 the magnitude is floored at
  /// `floor` inside the power; with `strict` a magnitude below the floor
  /// raises SingularTangent instead.
  Eigen::MatrixXd tangent(const StrainValue& x, bool strict = false) const;

  static constexpr double kSingularFloor = 1e-10;

 private:
  double p_;
  LawKind kind_;
  double delta_;
  LawMode mode_;
};

struct MonotonicityGap {
  double pairing = 0.0;           // <A'(x)-A'(y), x-y>
  double lower_bound = 0.0;       // (|x|+|y|)^(p-2)|x-y|^2 or |x-y|^p
  double stress_difference = 0.0; // |A'(x)-A'(y)| = sup_z <A'(x)-A'(y), z>/|z|
  double upper_bound = 0.0;       // |x-y|^(p-1) or (|x|+|y|)^(p-2)|x-y|
};

MonotonicityGap monotonicity_gap(const MaterialLaw& law, const StrainValue& x,
                                 const StrainValue& y);

/// Exterior Lame coefficients; scalar mode uses the unit Laplacian.
struct ExteriorCoefficients {
  double mu = 1.0;
  double lambda = 1.0;
  bool scalar = false;

  void validate() const;
};

LawKind parse_law_kind(const std::string& name);
std::string law_kind_name(LawKind kind);

}  // namespace febe
