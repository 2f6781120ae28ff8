#include "febe/study.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "febe/export.hpp"

namespace febe {

ConvergenceTable convergence_table(const std::vector<AdaptiveRecord>& records) {
  ConvergenceTable t;
  t.uses_error = !records.empty() && records.front().has_error;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    ConvergenceRow row;
    row.h = r.h;
    row.dofs = r.dofs();
    row.error_gradient = t.uses_error ? r.error_gradient : nan;
    row.error_boundary = t.uses_error ? r.error_boundary : nan;
    row.error = t.uses_error ? r.error : nan;
    row.estimator = r.estimator;
    row.rate_h = row.rate_dofs = nan;
    if (i > 0) {
      const auto& prev = t.rows.back();
      const double e0 = t.uses_error ? prev.error : prev.estimator;
      const double e1 = t.uses_error ? row.error : row.estimator;
      if (e0 > 0.0 && e1 > 0.0) {
        if (prev.h != row.h) row.rate_h = std::log(e0 / e1) / std::log(prev.h / row.h);
        if (prev.dofs != row.dofs)
          row.rate_dofs = 2.0 * std::log(e0 / e1) / std::log(static_cast<double>(row.dofs) / prev.dofs);
      }
    }
    t.rows.push_back(row);
  }
  return t;
}

ConvergenceTable convergence_study(RunConfig config, int levels, const std::string& mode, const std::string& outdir,
                                   std::vector<AdaptiveRecord>* records) {
  if (levels < 1) throw std::invalid_argument("study: levels must be >= 1");
  if (mode != "uniform" && mode != "adaptive") throw std::invalid_argument("study: mode must be uniform or adaptive");
  config.levels = levels;
  config.mode = mode;
  auto recs = run_adaptive(config, outdir);
  ConvergenceTable t = convergence_table(recs);
  if (records) *records = std::move(recs);
  return t;
}

void write_table_csv(const ConvergenceTable& table, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "h,dofs,error_gradient,error_boundary,error,estimator,rate_h,rate_dofs\n";
  for (const auto& r : table.rows) {
    f << format_number(r.h) << ',' << r.dofs << ',' << format_number(r.error_gradient) << ','
      << format_number(r.error_boundary) << ',' << format_number(r.error) << ',' << format_number(r.estimator) << ','
      << format_number(r.rate_h) << ',' << format_number(r.rate_dofs) << '\n';
  }
}

std::string format_table(const ConvergenceTable& table) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%10s %8s %12s %12s %8s %8s\n", "h", "dofs", "error", "estimator", "rate_h",
                "rate_N");
  out += buf;
  for (const auto& r : table.rows) {
    std::snprintf(buf, sizeof buf, "%10.4g %8d %12.4e %12.4e %8.3f %8.3f\n", r.h, r.dofs, r.error, r.estimator,
                  r.rate_h, r.rate_dofs);
    out += buf;
  }
  return out;
}

}  // namespace febe
