#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "febe/fem.hpp"
#include "febe/material.hpp"
#include "febe/mesh.hpp"

namespace febe {

/// Analytic problem description. Manufactured presets take the exterior
/// field to be zero, so u0 is the trace of the interior solution and t0 its
/// conormal derivative.
struct Preset {
  std::string name;
  int components = 1;
  Mesh mesh;
  VectorField f;
  VectorField u0;
  BoundaryField t0;
  std::function<double(const Point&)> friction;  // empty: no friction
  std::optional<VectorField> exact;
  MatrixField exact_gradient;  // set together with `exact`
};

std::vector<std::string> preset_names();
int preset_components(const std::string& name);
Preset make_preset(const std::string& name, const MaterialLaw& law);

/// Adds constants to f and t0. A nonzero shift drops the exact solution.
void shift_data(Preset& preset, double f_offset, double t0_offset);

/// Data of the zero-exterior manufactured problem for an interior field with
/// the given gradient; f is obtained by central differences of the stress
/// unless `f` is supplied.
Preset manufactured(std::string name, int components, Mesh mesh, const MaterialLaw& law, VectorField u,
                    MatrixField grad, VectorField f = nullptr);

}  // namespace febe
