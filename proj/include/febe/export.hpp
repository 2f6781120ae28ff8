#pragma once

#include <string>
#include <vector>

#include "febe/vi.hpp"

namespace febe {

/// Per-vertex output fields; boundary quantities are zero away from the
/// interior of Gamma_s.
struct PointFields {
  Eigen::MatrixXd u;  // num_vertices x components
  Vector v_n, v_t, sigma_n, sigma_t;
};

PointFields point_fields(const CoupledSpaces& spaces, const ProblemData& data, const DiscreteSolution& sol);

void write_points_csv(const std::string& path, const Mesh& mesh, const PointFields& fields);
void write_cells_csv(const std::string& path, const Mesh& mesh, const Vector& indicator);
/// Legacy ASCII unstructured grid with point vectors and cell scalars.
void write_vtk(const std::string& path, const Mesh& mesh, const PointFields& fields, const Vector& indicator);

/// Writes `<prefix>.vtk`, `<prefix>_points.csv` and `<prefix>_cells.csv`.
void export_fields(const CoupledSpaces& spaces, const ProblemData& data, const DiscreteSolution& sol,
                   const Vector& indicator, const std::string& prefix);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<double> column(const std::string& name) const;
};
/// Reads a numeric CSV with a header line.
CsvTable read_csv(const std::string& path);

/// %.17g formatting used for every numeric output.
std::string format_number(double x);

}  // namespace febe
