#pragma once

#include <cstdio>
#include <string>

namespace acceptance {

struct Outcome {
  bool pass = true;
  std::string detail;

  // Records a named check; failed checks are listed first in the detail line.
  void check(bool ok, const std::string& what) {
    if (!ok) {
      detail = "FAILED " + what + (detail.empty() ? "" : "; " + detail);
      pass = false;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome material_bounds();
Outcome bem_operators();
Outcome steklov_spectrum();
Outcome solver_exactness();
Outcome kkt_certificate();
Outcome formulation_equivalence();
Outcome apriori_convergence();
Outcome aposteriori_reliability();
Outcome adaptivity_localization();
Outcome reproducibility();

}  // namespace acceptance
