#include "febe/export.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace febe {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  return f;
}

}  // namespace

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

PointFields point_fields(const CoupledSpaces& spaces, const ProblemData& data, const DiscreteSolution& sol) {
  const Mesh& mesh = *spaces.mesh;
  const int c = spaces.components();
  const int nv = mesh.num_vertices();
  PointFields f;
  f.u.resize(nv, c);
  for (int v = 0; v < nv; ++v)
    for (int j = 0; j < c; ++j) f.u(v, j) = sol.u[spaces.fe.dof(v, j)];
  f.v_n = f.v_t = f.sigma_n = f.sigma_t = Vector::Zero(nv);
  if (spaces.num_slip() == 0 || sol.v.size() == 0) return f;
  const NodalStress st = nodal_stress(spaces, data, sol);
  const auto& slip = spaces.boundary.slip_nodes();
  const auto& loop = mesh.boundary_loop();
  for (std::size_t i = 0; i < slip.size(); ++i) {
    const int v = loop[slip[i]];
    f.v_n[v] = st.v_n[i];
    f.v_t[v] = st.v_t[i];
    f.sigma_n[v] = st.sigma_n[i];
    f.sigma_t[v] = st.sigma_t[i];
  }
  return f;
}

void write_points_csv(const std::string& path, const Mesh& mesh, const PointFields& fields) {
  auto f = open_out(path);
  const int c = static_cast<int>(fields.u.cols());
  f << "id,x,y";
  for (int j = 0; j < c; ++j) f << ",u" << j;
  f << ",v_n,v_t,sigma_n,sigma_t\n";
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    f << v << ',' << format_number(mesh.vertices()[v].x()) << ',' << format_number(mesh.vertices()[v].y());
    for (int j = 0; j < c; ++j) f << ',' << format_number(fields.u(v, j));
    f << ',' << format_number(fields.v_n[v]) << ',' << format_number(fields.v_t[v]) << ','
      << format_number(fields.sigma_n[v]) << ',' << format_number(fields.sigma_t[v]) << '\n';
  }
}

void write_cells_csv(const std::string& path, const Mesh& mesh, const Vector& indicator) {
  auto f = open_out(path);
  f << "id,v0,v1,v2,indicator\n";
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tr = mesh.triangles()[t];
    f << t << ',' << tr[0] << ',' << tr[1] << ',' << tr[2] << ','
      << format_number(indicator.size() > t ? indicator[t] : 0.0) << '\n';
  }
}

void write_vtk(const std::string& path, const Mesh& mesh, const PointFields& fields, const Vector& indicator) {
  auto f = open_out(path);
  const int nv = mesh.num_vertices();
  const int nt = mesh.num_triangles();
  f << "# vtk DataFile Version 3.0\nfebe solution\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  f << "POINTS " << nv << " double\n";
  for (const auto& p : mesh.vertices()) f << format_number(p.x()) << ' ' << format_number(p.y()) << " 0\n";
  f << "CELLS " << nt << ' ' << 4 * nt << '\n';
  for (const auto& t : mesh.triangles()) f << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  f << "CELL_TYPES " << nt << '\n';
  for (int t = 0; t < nt; ++t) f << "5\n";
  f << "POINT_DATA " << nv << '\n';
  if (fields.u.cols() == 2) {
    f << "VECTORS u double\n";
    for (int v = 0; v < nv; ++v) f << format_number(fields.u(v, 0)) << ' ' << format_number(fields.u(v, 1)) << " 0\n";
  } else {
    f << "SCALARS u double 1\nLOOKUP_TABLE default\n";
    for (int v = 0; v < nv; ++v) f << format_number(fields.u(v, 0)) << '\n';
  }
  const std::pair<const char*, const Vector*> scalars[] = {
      {"v_n", &fields.v_n}, {"v_t", &fields.v_t}, {"sigma_n", &fields.sigma_n}, {"sigma_t", &fields.sigma_t}};
  for (const auto& [name, data] : scalars) {
    f << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (int v = 0; v < nv; ++v) f << format_number((*data)[v]) << '\n';
  }
  f << "CELL_DATA " << nt << "\nSCALARS indicator double 1\nLOOKUP_TABLE default\n";
  for (int t = 0; t < nt; ++t) f << format_number(indicator.size() > t ? indicator[t] : 0.0) << '\n';
}

void export_fields(const CoupledSpaces& spaces, const ProblemData& data, const DiscreteSolution& sol,
                   const Vector& indicator, const std::string& prefix) {
  const PointFields f = point_fields(spaces, data, sol);
  write_vtk(prefix + ".vtk", *spaces.mesh, f, indicator);
  write_points_csv(prefix + "_points.csv", *spaces.mesh, f);
  write_cells_csv(prefix + "_cells.csv", *spaces.mesh, indicator);
}

std::vector<double> CsvTable::column(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] != name) continue;
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.at(j));
    return out;
  }
  throw std::out_of_range("csv: no column '" + name + "'");
}

CsvTable read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  CsvTable t;
  std::string line;
  if (!std::getline(f, line)) return t;
  std::stringstream hs(line);
  for (std::string cell; std::getline(hs, cell, ',');) t.header.push_back(cell);
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) {
      char* end = nullptr;
      const double x = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) throw std::runtime_error("csv: non-numeric cell '" + cell + "' in " + path);
      row.push_back(x);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace febe
