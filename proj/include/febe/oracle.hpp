#pragma once

#include <vector>

#include "febe/vi.hpp"

namespace febe {

struct OracleOptions {
  int max_constrained = 12;      // enumeration refuses larger instances
  long subgradient_iters = 1000000;
  double feasibility_tol = 1e-10;
  CompatMode compat = CompatMode::kRigid;
};

struct OracleResult {
  double objective = 0.0;
  Vector u;
  Vector v;
  std::vector<int> stick_slip;  // per slip node: 0 stick, +1/-1 slip direction
  std::vector<int> contact;     // per slip node: 1 if v_n = 0 (vector mode)
  bool exact = false;           // enumeration (p = 2) or subgradient estimate
  long evaluated = 0;           // patterns solved or iterations run
  double last_step = 0.0;       // subgradient: final step size
};

/// Brute-force minimizer of the discrete contact problem. For p = 2 all
/// contact/stick/slip patterns are enumerated; otherwise a projected
/// subgradient run gives an upper bound for the minimum.
OracleResult oracle_vi(const CoupledSpaces& spaces, const MaterialLaw& law, const ProblemData& data,
                       const FrictionData& friction, const OracleOptions& options = {});

/// Classifies v_t per slip node using an absolute threshold.
std::vector<int> stick_slip_pattern(const CoupledSpaces& spaces, const Vector& v, double threshold);

}  // namespace febe
