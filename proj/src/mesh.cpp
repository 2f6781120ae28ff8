#include "febe/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>
#include <utility>

namespace febe {

namespace {

using EdgeKey = std::pair<int, int>;

EdgeKey key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
}

// Rotate each triangle so its longest edge becomes the refinement edge v1-v2.
void choose_longest_edges(const std::vector<Point>& v,
                          std::vector<std::array<int, 3>>& tris) {
  for (auto& t : tris) {
    int best = 0;
    double best_len = -1.0;
    for (int k = 0; k < 3; ++k) {
      const double len = (v[t[(k + 1) % 3]] - v[t[(k + 2) % 3]]).norm();
      if (len > best_len * (1.0 + 1e-12)) {
        best_len = len;
        best = k;
      }
    }
    t = {t[best], t[(best + 1) % 3], t[(best + 2) % 3]};
  }
}

}  // namespace

char label_char(BoundaryLabel label) {
  return label == BoundaryLabel::kSlip ? 'S' : 'T';
}

Mesh::Mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles,
           std::vector<BoundaryEdge> boundary_edges, std::vector<int> generation,
           double scale)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      boundary_(std::move(boundary_edges)),
      generation_(std::move(generation)),
      scale_(scale) {
  if (generation_.empty()) generation_.assign(triangles_.size(), 0);
  validate_and_build();
}

void Mesh::validate_and_build() {
  const int nv = num_vertices();
  if (nv < 3 || triangles_.empty()) throw MeshError("mesh: empty mesh");
  if (generation_.size() != triangles_.size())
    throw MeshError("mesh: generation size mismatch");
  for (auto& t : triangles_) {
    for (int v : t)
      if (v < 0 || v >= nv) throw MeshError("mesh: triangle references vertex out of range");
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
      throw MeshError("mesh: triangle with repeated vertex");
    const double a = signed_area(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
    if (a == 0.0 || !std::isfinite(a)) throw MeshError("mesh: degenerate triangle");
    if (a < 0.0) std::swap(t[1], t[2]);
  }
  for (const auto& e : boundary_)
    if (e.a < 0 || e.a >= nv || e.b < 0 || e.b >= nv || e.a == e.b)
      throw MeshError("mesh: boundary edge references vertex out of range");

  // edge -> incident (triangle, local index)
  std::map<EdgeKey, std::vector<std::pair<int, int>>> incidence;
  for (int t = 0; t < num_triangles(); ++t)
    for (int k = 0; k < 3; ++k)
      incidence[key(triangles_[t][(k + 1) % 3], triangles_[t][(k + 2) % 3])]
          .emplace_back(t, k);

  std::map<EdgeKey, int> labeled;
  for (int i = 0; i < num_boundary_edges(); ++i) {
    if (!labeled.emplace(key(boundary_[i].a, boundary_[i].b), i).second)
      throw MeshError("mesh: duplicate boundary edge");
  }

  edges_ = EdgeSet{};
  edges_.triangle_edges.assign(triangles_.size(), {-1, -1, -1});
  std::vector<BoundaryEdge> oriented(boundary_.size());
  std::vector<int> boundary_edge_index(boundary_.size(), -1);
  for (const auto& [k, inc] : incidence) {
    if (inc.size() > 2) throw MeshError("mesh: non-conforming connectivity (edge shared by more than two triangles)");
    Edge e;
    const auto [t0, l0] = inc[0];
    e.a = triangles_[t0][(l0 + 1) % 3];
    e.b = triangles_[t0][(l0 + 2) % 3];
    e.left = t0;
    e.length = (vertices_[e.a] - vertices_[e.b]).norm();
    const int id = static_cast<int>(edges_.edges.size());
    edges_.triangle_edges[t0][l0] = id;
    auto it = labeled.find(k);
    if (inc.size() == 2) {
      if (it != labeled.end())
        throw MeshError("mesh: labeled boundary edge is an interior edge");
      const auto [t1, l1] = inc[1];
      if (triangles_[t1][(l1 + 1) % 3] != e.b)
        throw MeshError("mesh: inconsistent triangle orientation across an edge");
      e.right = t1;
      edges_.triangle_edges[t1][l1] = id;
      edges_.interior.push_back(id);
    } else {
      if (it == labeled.end()) throw MeshError("mesh: unlabeled boundary edge");
      oriented[it->second] = {e.a, e.b, boundary_[it->second].label};
      boundary_edge_index[it->second] = id;
    }
    edges_.edges.push_back(e);
  }
  for (int i = 0; i < num_boundary_edges(); ++i)
    if (boundary_edge_index[i] < 0)
      throw MeshError("mesh: labeled boundary edge does not belong to the mesh");

  // Order boundary edges along a single closed loop.
  std::map<int, std::vector<int>> outgoing;
  for (int i = 0; i < num_boundary_edges(); ++i) outgoing[oriented[i].a].push_back(i);
  for (const auto& [v, out] : outgoing)
    if (out.size() != 1) throw MeshError("mesh: boundary is not a simple closed polygon");
  std::vector<BoundaryEdge> ordered;
  std::vector<int> ordered_index;
  loop_.clear();
  int cur = 0;
  for (int step = 0; step < num_boundary_edges(); ++step) {
    ordered.push_back(oriented[cur]);
    ordered_index.push_back(boundary_edge_index[cur]);
    loop_.push_back(oriented[cur].a);
    auto nx = outgoing.find(oriented[cur].b);
    if (nx == outgoing.end()) throw MeshError("mesh: boundary is not closed");
    cur = nx->second.front();
    if (cur == 0 && step + 1 < num_boundary_edges())
      throw MeshError("mesh: boundary consists of more than one loop");
  }
  if (cur != 0) throw MeshError("mesh: boundary is not closed");
  boundary_ = std::move(ordered);
  edges_.boundary = ordered_index;
  for (int i = 0; i < num_boundary_edges(); ++i)
    edges_.edges[edges_.boundary[i]].boundary_index = i;
  boundary_pos_.assign(vertices_.size(), -1);
  for (int i = 0; i < static_cast<int>(loop_.size()); ++i) boundary_pos_[loop_[i]] = i;

  if (std::none_of(boundary_.begin(), boundary_.end(), [](const BoundaryEdge& e) {
        return e.label == BoundaryLabel::kTransmission;
      }))
    throw MeshError("mesh: transmission boundary is empty");
}

double Mesh::area(int t) const {
  const auto& tr = triangles_[t];
  return signed_area(vertices_[tr[0]], vertices_[tr[1]], vertices_[tr[2]]);
}

Point Mesh::centroid(int t) const {
  const auto& tr = triangles_[t];
  return (vertices_[tr[0]] + vertices_[tr[1]] + vertices_[tr[2]]) / 3.0;
}

Point Mesh::boundary_normal(int e) const {
  const Point d = vertices_[boundary_[e].b] - vertices_[boundary_[e].a];
  return Point(d.y(), -d.x()) / d.norm();
}

double Mesh::boundary_length(int e) const {
  return (vertices_[boundary_[e].b] - vertices_[boundary_[e].a]).norm();
}

double Mesh::boundary_diameter() const {
  double d = 0.0;
  for (std::size_t i = 0; i < loop_.size(); ++i)
    for (std::size_t j = i + 1; j < loop_.size(); ++j)
      d = std::max(d, (vertices_[loop_[i]] - vertices_[loop_[j]]).norm());
  return d;
}

double Mesh::shape_ratio(int t) const {
  const auto& tr = triangles_[t];
  double perimeter = 0.0;
  double longest = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double len = (vertices_[tr[(k + 1) % 3]] - vertices_[tr[k]]).norm();
    perimeter += len;
    longest = std::max(longest, len);
  }
  const double rho = 4.0 * area(t) / perimeter;  // inscribed diameter
  return longest / rho;
}

double Mesh::max_shape_ratio() const {
  double r = 0.0;
  for (int t = 0; t < num_triangles(); ++t) r = std::max(r, shape_ratio(t));
  return r;
}

int Mesh::triangles_with_multiple_boundary_edges() const {
  std::vector<int> count(triangles_.size(), 0);
  for (int e = 0; e < num_boundary_edges(); ++e) ++count[boundary_owner(e)];
  return static_cast<int>(std::count_if(count.begin(), count.end(), [](int c) { return c > 1; }));
}

Mesh load_mesh(const std::string& text) {
  std::istringstream in(text);
  int nv = 0, nt = 0, nb = 0;
  if (!(in >> nv >> nt >> nb) || nv <= 0 || nt <= 0 || nb <= 0)
    throw MeshError("mesh: bad header (expected `nv nt nb`)");
  std::vector<Point> v(nv);
  for (auto& p : v)
    if (!(in >> p.x() >> p.y())) throw MeshError("mesh: truncated vertex list");
  std::vector<std::array<int, 3>> t(nt);
  for (auto& tr : t)
    if (!(in >> tr[0] >> tr[1] >> tr[2])) throw MeshError("mesh: truncated triangle list");
  std::vector<BoundaryEdge> b(nb);
  for (auto& e : b) {
    std::string label;
    if (!(in >> e.a >> e.b >> label)) throw MeshError("mesh: truncated boundary list");
    if (label == "S" || label == "s")
      e.label = BoundaryLabel::kSlip;
    else if (label == "T" || label == "t")
      e.label = BoundaryLabel::kTransmission;
    else
      throw MeshError("mesh: unknown boundary label '" + label + "'");
  }
  for (const auto& tr : t)
    for (int i : tr)
      if (i < 0 || i >= nv) throw MeshError("mesh: triangle references vertex out of range");
  choose_longest_edges(v, t);
  return Mesh(std::move(v), std::move(t), std::move(b));
}

Mesh load_mesh_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw MeshError("mesh: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return load_mesh(ss.str());
}

std::string format_mesh(const Mesh& mesh) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << mesh.num_vertices() << ' ' << mesh.num_triangles() << ' '
      << mesh.num_boundary_edges() << '\n';
  for (const auto& p : mesh.vertices()) out << p.x() << ' ' << p.y() << '\n';
  for (const auto& t : mesh.triangles()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const auto& e : mesh.boundary_edges())
    out << e.a << ' ' << e.b << ' ' << label_char(e.label) << '\n';
  return out.str();
}

void save_mesh_file(const Mesh& mesh, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw MeshError("mesh: cannot write " + path);
  f << format_mesh(mesh);
}

Mesh normalize_capacity(const Mesh& mesh, double target) {
  const double d = mesh.boundary_diameter();
  if (d < 1.0) return mesh;
  const double s = target / d;
  std::vector<Point> v = mesh.vertices();
  for (auto& p : v) p *= s;
  return Mesh(std::move(v), mesh.triangles(), mesh.boundary_edges(),
              mesh.generation(), mesh.scale() * s);
}

Mesh refine(const Mesh& mesh, const std::set<int>& marked) {
  for (int t : marked)
    if (t < 0 || t >= mesh.num_triangles()) throw MeshError("refine: invalid triangle id");
  if (marked.empty()) return mesh;

  const auto& tris = mesh.triangles();
  std::set<EdgeKey> edges;
  for (int t : marked) edges.insert(key(tris[t][1], tris[t][2]));
  // Closure: a triangle with any marked edge must bisect its refinement edge.
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& tr : tris) {
      const EdgeKey ref = key(tr[1], tr[2]);
      if (edges.count(ref)) continue;
      if (edges.count(key(tr[0], tr[1])) || edges.count(key(tr[2], tr[0]))) {
        edges.insert(ref);
        changed = true;
      }
    }
  }

  std::vector<Point> v = mesh.vertices();
  std::map<EdgeKey, int> midpoint;
  for (const auto& e : edges) {
    midpoint[e] = static_cast<int>(v.size());
    v.push_back(0.5 * (v[e.first] + v[e.second]));
  }

  std::vector<std::array<int, 3>> out;
  std::vector<int> gen;
  out.reserve(tris.size() * 2);
  auto split = [&](auto&& self, const std::array<int, 3>& tr, int g) -> void {
    auto it = midpoint.find(key(tr[1], tr[2]));
    if (it == midpoint.end()) {
      out.push_back(tr);
      gen.push_back(g);
      return;
    }
    const int m = it->second;
    self(self, {m, tr[0], tr[1]}, g + 1);
    self(self, {m, tr[2], tr[0]}, g + 1);
  };
  for (int t = 0; t < mesh.num_triangles(); ++t) split(split, tris[t], mesh.generation()[t]);

  std::vector<BoundaryEdge> b;
  for (const auto& e : mesh.boundary_edges()) {
    auto it = midpoint.find(key(e.a, e.b));
    if (it == midpoint.end()) {
      b.push_back(e);
    } else {
      b.push_back({e.a, it->second, e.label});
      b.push_back({it->second, e.b, e.label});
    }
  }
  return Mesh(std::move(v), std::move(out), std::move(b), std::move(gen), mesh.scale());
}

Mesh refine_uniform(const Mesh& mesh) {
  std::set<int> all;
  for (int t = 0; t < mesh.num_triangles(); ++t) all.insert(t);
  return refine(mesh, all);
}

MeshSize mesh_size(const Mesh& mesh) {
  MeshSize s;
  s.h_triangle.resize(mesh.num_triangles());
  const auto& v = mesh.vertices();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tr = mesh.triangles()[t];
    double d = 0.0;
    for (int k = 0; k < 3; ++k) d = std::max(d, (v[tr[(k + 1) % 3]] - v[tr[k]]).norm());
    s.h_triangle[t] = d;
    s.h = std::max(s.h, d);
  }
  for (const auto& e : mesh.edges().edges) s.h_edge.push_back(e.length);
  return s;
}

int count_hanging_nodes(const Mesh& mesh) {
  const auto& v = mesh.vertices();
  int hanging = 0;
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    for (const auto& e : mesh.edges().edges) {
      if (e.a == i || e.b == i) continue;
      const Point d = v[e.b] - v[e.a];
      const double t = (v[i] - v[e.a]).dot(d) / d.squaredNorm();
      if (t <= 1e-12 || t >= 1.0 - 1e-12) continue;
      if ((v[e.a] + t * d - v[i]).norm() < 1e-12 * e.length) {
        ++hanging;
        break;
      }
    }
  }
  return hanging;
}

Mesh make_rectangle(double x0, double y0, double x1, double y1, int nx, int ny,
                    const std::vector<BoundaryLabel>& side_labels) {
  if (nx < 1 || ny < 1) throw MeshError("make_rectangle: need nx, ny >= 1");
  std::vector<BoundaryLabel> labels = side_labels;
  if (labels.empty()) labels.assign(4, BoundaryLabel::kTransmission);
  if (labels.size() != 4) throw MeshError("make_rectangle: need 4 side labels");
  std::vector<Point> v;
  auto id = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      v.emplace_back(x0 + (x1 - x0) * i / nx, y0 + (y1 - y0) * j / ny);
  std::vector<std::array<int, 3>> t;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      // alternate the diagonal so that bisection patterns stay symmetric
      if ((i + j) % 2 == 0) {
        t.push_back({a, b, c});
        t.push_back({a, c, d});
      } else {
        t.push_back({a, b, d});
        t.push_back({b, c, d});
      }
    }
  std::vector<BoundaryEdge> b;
  for (int i = 0; i < nx; ++i) b.push_back({id(i, 0), id(i + 1, 0), labels[0]});
  for (int j = 0; j < ny; ++j) b.push_back({id(nx, j), id(nx, j + 1), labels[1]});
  for (int i = nx; i > 0; --i) b.push_back({id(i, ny), id(i - 1, ny), labels[2]});
  for (int j = ny; j > 0; --j) b.push_back({id(0, j), id(0, j - 1), labels[3]});
  choose_longest_edges(v, t);
  return Mesh(std::move(v), std::move(t), std::move(b));
}

Mesh make_lshape(double size, int n) {
  // (0,0)-(size,size) square minus the upper-right quadrant, reentrant corner
  // at the center.
  if (n < 1) throw MeshError("make_lshape: need n >= 1");
  const int m = 2 * n;
  const double hstep = size / m;
  std::map<std::pair<int, int>, int> ids;
  std::vector<Point> v;
  auto inside_cell = [&](int i, int j) { return !(i >= n && j >= n); };
  auto vid = [&](int i, int j) {
    auto [it, fresh] = ids.emplace(std::pair{i, j}, static_cast<int>(v.size()));
    if (fresh) v.emplace_back(i * hstep, j * hstep);
    return it->second;
  };
  std::vector<std::array<int, 3>> t;
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      if (!inside_cell(i, j)) continue;
      const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
      if ((i + j) % 2 == 0) {
        t.push_back({a, b, c});
        t.push_back({a, c, d});
      } else {
        t.push_back({a, b, d});
        t.push_back({b, c, d});
      }
    }
  std::vector<BoundaryEdge> b;
  auto add = [&](int i0, int j0, int i1, int j1) {
    b.push_back({vid(i0, j0), vid(i1, j1), BoundaryLabel::kTransmission});
  };
  for (int i = 0; i < m; ++i) add(i, 0, i + 1, 0);
  for (int j = 0; j < n; ++j) add(m, j, m, j + 1);
  for (int i = m; i > n; --i) add(i, n, i - 1, n);
  for (int j = n; j < m; ++j) add(n, j, n, j + 1);
  for (int i = n; i > 0; --i) add(i, m, i - 1, m);
  for (int j = m; j > 0; --j) add(0, j, 0, j - 1);
  choose_longest_edges(v, t);
  return Mesh(std::move(v), std::move(t), std::move(b));
}

Mesh make_disk(double radius, int segments, int rings) {
  if (segments < 3 || rings < 1) throw MeshError("make_disk: need segments >= 3, rings >= 1");
  std::vector<Point> v{Point(0.0, 0.0)};
  std::vector<std::vector<int>> ring_ids(rings + 1);
  ring_ids[0] = {0};
  for (int r = 1; r <= rings; ++r) {
    const int count = r == rings ? segments
                                 : std::max(3, static_cast<int>(std::lround(double(segments) * r / rings)));
    const double rad = radius * r / rings;
    for (int k = 0; k < count; ++k) {
      const double th = 2.0 * std::numbers::pi * k / count;
      ring_ids[r].push_back(static_cast<int>(v.size()));
      v.emplace_back(rad * std::cos(th), rad * std::sin(th));
    }
  }
  std::vector<std::array<int, 3>> t;
  const auto& r1 = ring_ids[1];
  for (std::size_t k = 0; k < r1.size(); ++k) t.push_back({0, r1[k], r1[(k + 1) % r1.size()]});
  for (int r = 1; r < rings; ++r) {
    const auto& in = ring_ids[r];
    const auto& out = ring_ids[r + 1];
    const std::size_t ni = in.size(), no = out.size();
    std::size_t i = 0, o = 0;
    // merge the two rings by angle
    while (i < ni || o < no) {
      const double ai = 2.0 * std::numbers::pi * double(i + 1) / double(ni);
      const double ao = 2.0 * std::numbers::pi * double(o + 1) / double(no);
      if (o < no && (i >= ni || ao <= ai)) {
        t.push_back({in[i % ni], out[o % no], out[(o + 1) % no]});
        ++o;
      } else {
        t.push_back({in[i % ni], out[o % no], in[(i + 1) % ni]});
        ++i;
      }
    }
  }
  std::vector<BoundaryEdge> b;
  const auto& outer = ring_ids[rings];
  for (std::size_t k = 0; k < outer.size(); ++k)
    b.push_back({outer[k], outer[(k + 1) % outer.size()], BoundaryLabel::kTransmission});
  choose_longest_edges(v, t);
  return Mesh(std::move(v), std::move(t), std::move(b));
}

}  // namespace febe
