#pragma once

#include <string>
#include <vector>

#include "febe/adapt.hpp"

namespace febe {

struct ConvergenceRow {
  double h = 0.0;
  int dofs = 0;
  double error_gradient = 0.0;
  double error_boundary = 0.0;
  double error = 0.0;
  double estimator = 0.0;
  double rate_h = 0.0;     // log ratio of errors over log ratio of h; NaN on the first row
  double rate_dofs = 0.0;  // same against N^(-1/2)
};

/// Rates use the error when the preset has an exact solution and the
/// estimator otherwise.
struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  bool uses_error = true;
};

ConvergenceTable convergence_table(const std::vector<AdaptiveRecord>& records);
/// Runs `levels` levels in `mode` (uniform | adaptive) and tabulates them.
ConvergenceTable convergence_study(RunConfig config, int levels, const std::string& mode,
                                   const std::string& outdir = "",
                                   std::vector<AdaptiveRecord>* records = nullptr);
void write_table_csv(const ConvergenceTable& table, const std::string& path);
std::string format_table(const ConvergenceTable& table);

}  // namespace febe
