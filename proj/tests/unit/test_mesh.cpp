#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "febe/mesh.hpp"

using namespace febe;

namespace {

const char* kSquare =
    "4 2 4\n"
    "0 0\n1 0\n1 1\n0 1\n"
    "0 1 2\n0 2 3\n"
    "0 1 T\n1 2 T\n2 3 T\n3 0 T\n";

const char* kSquareLeftSlip =
    "4 2 4\n"
    "0 0\n1 0\n1 1\n0 1\n"
    "0 1 2\n0 2 3\n"
    "0 1 T\n1 2 T\n2 3 T\n3 0 S\n";

double boundary_total(const Mesh& m) {
  double s = 0.0;
  for (int e = 0; e < m.num_boundary_edges(); ++e) s += m.boundary_length(e);
  return s;
}

}  // namespace

TEST_CASE("load_mesh reads the unit square") {
  const Mesh m = load_mesh(kSquare);
  CHECK(m.num_vertices() == 4);
  CHECK(m.num_triangles() == 2);
  CHECK(m.num_boundary_edges() == 4);
  CHECK(m.edges().interior.size() == 1);
  CHECK(m.boundary_loop().size() == 4);
}

TEST_CASE("load_mesh keeps labels") {
  const Mesh m = load_mesh(kSquareLeftSlip);
  int slip = 0;
  for (const auto& e : m.boundary_edges()) slip += e.label == BoundaryLabel::kSlip;
  CHECK(slip == 1);
}

TEST_CASE("load_mesh rejects invalid input") {
  CHECK_THROWS_AS(load_mesh("4 2 4\n0 0\n1 0\n1 1\n0 1\n0 1 7\n0 2 3\n0 1 T\n1 2 T\n2 3 T\n3 0 T\n"),
                  MeshError);
  // missing label for one boundary edge
  CHECK_THROWS_AS(load_mesh("4 2 3\n0 0\n1 0\n1 1\n0 1\n0 1 2\n0 2 3\n0 1 T\n1 2 T\n2 3 T\n"),
                  MeshError);
  // no transmission part
  CHECK_THROWS_AS(load_mesh("4 2 4\n0 0\n1 0\n1 1\n0 1\n0 1 2\n0 2 3\n0 1 S\n1 2 S\n2 3 S\n3 0 S\n"),
                  MeshError);
}

TEST_CASE("format and load round trip") {
  const Mesh m = make_rectangle(0, 0, 1, 2, 3, 4);
  const Mesh r = load_mesh(format_mesh(m));
  CHECK(r.num_vertices() == m.num_vertices());
  CHECK(r.num_triangles() == m.num_triangles());
  for (int v = 0; v < m.num_vertices(); ++v) CHECK((r.vertices()[v] - m.vertices()[v]).norm() == 0.0);
}

TEST_CASE("refine with empty marking is the identity") {
  const Mesh m = load_mesh(kSquare);
  const Mesh r = refine(m, {});
  CHECK(r.num_triangles() == m.num_triangles());
  CHECK(r.num_vertices() == m.num_vertices());
}

TEST_CASE("single bisection closes without hanging nodes") {
  const Mesh m = load_mesh(kSquare);
  const Mesh r = refine(m, {0});
  CHECK(r.num_triangles() >= 3);
  CHECK(count_hanging_nodes(r) == 0);
  CHECK_THROWS(refine(m, {5}));
}

TEST_CASE("uniform refinement doubles the triangle count") {
  Mesh m = load_mesh(kSquare);
  for (int k = 1; k <= 3; ++k) {
    m = refine_uniform(m);
    CHECK(m.num_triangles() == 2 * (1 << k));
    CHECK(count_hanging_nodes(m) == 0);
  }
}

TEST_CASE("mesh size") {
  const Mesh m = load_mesh(kSquare);
  const MeshSize s = mesh_size(m);
  CHECK(s.h == doctest::Approx(std::sqrt(2.0)));
  const Mesh r = refine_uniform(refine_uniform(m));
  CHECK(mesh_size(r).h == doctest::Approx(std::sqrt(2.0) / 2.0));
  double mx = 0.0;
  for (double h : s.h_triangle) mx = std::max(mx, h);
  CHECK(mx == s.h);
}

TEST_CASE("random refinement keeps conformity, shape and boundary length") {
  Mesh m = make_lshape(1.0, 4);
  const double ratio0 = m.max_shape_ratio();
  const double len0 = boundary_total(m);
  std::mt19937 rng(3);
  for (int level = 0; level < 6; ++level) {
    std::set<int> marked;
    std::uniform_int_distribution<int> pick(0, m.num_triangles() - 1);
    for (int i = 0; i < std::max(1, m.num_triangles() / 5); ++i) marked.insert(pick(rng));
    m = refine(m, marked);
    CHECK(count_hanging_nodes(m) == 0);
    CHECK(m.max_shape_ratio() <= 4.0 * ratio0);
    CHECK(boundary_total(m) == doctest::Approx(len0).epsilon(1e-12));
  }
}

TEST_CASE("refinement inherits labels") {
  Mesh m = load_mesh(kSquareLeftSlip);
  m = refine_uniform(refine_uniform(m));
  double slip = 0.0;
  for (int e = 0; e < m.num_boundary_edges(); ++e) {
    if (m.boundary_edges()[e].label != BoundaryLabel::kSlip) continue;
    slip += m.boundary_length(e);
    const Point mid = 0.5 * (m.vertices()[m.boundary_edges()[e].a] + m.vertices()[m.boundary_edges()[e].b]);
    CHECK(mid.x() == doctest::Approx(0.0));
  }
  CHECK(slip == doctest::Approx(1.0));
}

TEST_CASE("capacity normalization") {
  const Mesh m = load_mesh(kSquare);
  const Mesh s = normalize_capacity(m, 0.8);
  CHECK(s.boundary_diameter() == doctest::Approx(0.8));
  CHECK(s.scale() == doctest::Approx(0.8 / std::sqrt(2.0)));
  const Mesh small = make_rectangle(0, 0, 0.3, 0.3, 2, 2);
  CHECK(normalize_capacity(small).scale() == 1.0);
}

TEST_CASE("generators produce valid meshes") {
  const Mesh disk = make_disk(0.4, 32, 4);
  CHECK(disk.num_boundary_edges() == 32);
  double area = 0.0;
  for (int t = 0; t < disk.num_triangles(); ++t) area += disk.area(t);
  const double polygon = 0.5 * 32 * 0.16 * std::sin(2 * M_PI / 32);
  CHECK(area == doctest::Approx(polygon).epsilon(1e-12));
  const Mesh l = make_lshape(1.0, 2);
  double la = 0.0;
  for (int t = 0; t < l.num_triangles(); ++t) la += l.area(t);
  CHECK(la == doctest::Approx(0.75));
}
