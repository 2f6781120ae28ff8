#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace febe {

using Point = Eigen::Vector2d;

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class BoundaryLabel : std::uint8_t { kSlip, kTransmission };

char label_char(BoundaryLabel label);

/// Boundary segment, oriented so that the domain lies to its left
/// (counterclockwise traversal of the outer boundary).
struct BoundaryEdge {
  int a = 0;
  int b = 0;
  BoundaryLabel label = BoundaryLabel::kTransmission;
};

/// Edge of the triangulation. Interior edges carry both neighbours; boundary
/// edges have `right == -1` and point into `Mesh::boundary_edges()`.
struct Edge {
  int a = 0;
  int b = 0;
  int left = -1;
  int right = -1;
  int boundary_index = -1;
  double length = 0.0;

  bool on_boundary() const { return right < 0; }
};

struct EdgeSet {
  std::vector<Edge> edges;
  std::vector<int> interior;  // indices into edges
  std::vector<int> boundary;  // indices into edges, ordered like boundary_edges
  // triangle -> its three edge indices, local edge k opposite local vertex k
  std::vector<std::array<int, 3>> triangle_edges;
};

struct MeshSize {
  double h = 0.0;
  std::vector<double> h_triangle;
  std::vector<double> h_edge;  // indexed like EdgeSet::edges
};

/// Conforming triangulation of a polygonal domain with labeled boundary.
///
/// Triangles are stored counterclockwise as (v0, v1, v2) with the refinement
/// edge v1-v2 opposite the newest vertex v0. Instances are immutable; every
/// refinement returns a new mesh.
class Mesh {
 public:
  Mesh() = default;
  Mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles,
       std::vector<BoundaryEdge> boundary_edges,
       std::vector<int> generation = {}, double scale = 1.0);

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_; }
  const std::vector<int>& generation() const { return generation_; }
  const EdgeSet& edges() const { return edges_; }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  int num_boundary_edges() const { return static_cast<int>(boundary_.size()); }

  /// Factor applied to the input coordinates (1 when no rescaling happened).
  double scale() const { return scale_; }

  double area(int t) const;
  Point centroid(int t) const;
  /// Outward unit normal of boundary edge `e`.
  Point boundary_normal(int e) const;
  double boundary_length(int e) const;

  /// Boundary vertices in counterclockwise order; boundary edge k joins
  /// loop[k] and loop[k+1].
  const std::vector<int>& boundary_loop() const { return loop_; }
  /// Index of a vertex in boundary_loop(), or -1.
  int boundary_position(int vertex) const { return boundary_pos_[vertex]; }

  double boundary_diameter() const;
  double shape_ratio(int t) const;  // h_T / rho_T
  double max_shape_ratio() const;
  /// Triangles owning more than one boundary edge (allowed, but reported).
  int triangles_with_multiple_boundary_edges() const;
  /// Triangle owning boundary edge e.
  int boundary_owner(int e) const { return edges_.edges[edges_.boundary[e]].left; }

 private:
  void validate_and_build();

  std::vector<Point> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<BoundaryEdge> boundary_;
  std::vector<int> generation_;
  double scale_ = 1.0;
  EdgeSet edges_;
  std::vector<int> loop_;
  std::vector<int> boundary_pos_;
};

/// Parses the plain-text format: `nv nt nb`, nv lines `x y`, nt lines
/// `i j k`, nb lines `i j label` with label S (slip) or T (transmission).
Mesh load_mesh(const std::string& text);
Mesh load_mesh_file(const std::string& path);
std::string format_mesh(const Mesh& mesh);
void save_mesh_file(const Mesh& mesh, const std::string& path);

/// Rescales about the origin so the boundary diameter is `target` whenever
/// it is not already below 1. Returns the input unchanged otherwise.
Mesh normalize_capacity(const Mesh& mesh, double target = 0.8);

/// Newest-vertex bisection of the marked triangles plus conforming closure.
Mesh refine(const Mesh& mesh, const std::set<int>& marked);
Mesh refine_uniform(const Mesh& mesh);

MeshSize mesh_size(const Mesh& mesh);

/// Counts vertices lying strictly inside an edge of another triangle.
int count_hanging_nodes(const Mesh& mesh);

// Structured generators used by presets and tests.
Mesh make_rectangle(double x0, double y0, double x1, double y1, int nx, int ny,
                    const std::vector<BoundaryLabel>& side_labels = {});
Mesh make_lshape(double size, int n);
Mesh make_disk(double radius, int segments, int rings);

}  // namespace febe
