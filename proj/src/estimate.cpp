#include "febe/estimate.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "febe/quadrature.hpp"

namespace febe {

namespace {

constexpr int kEdgePoints = 4;

double conj(double p) { return p / (p - 1.0); }

Point triangle_point(const Mesh& mesh, int t, const std::array<double, 3>& b) {
  const auto& tr = mesh.triangles()[t];
  const auto& v = mesh.vertices();
  return b[0] * v[tr[0]] + b[1] * v[tr[1]] + b[2] * v[tr[2]];
}

// Elementwise A'(eps(u_h)) as a (components x 2) matrix.
std::vector<Eigen::MatrixXd> element_stresses(const FESpace& fe, const MaterialLaw& law, const Vector& u) {
  std::vector<Eigen::MatrixXd> out(fe.mesh().num_triangles());
  for (int t = 0; t < fe.mesh().num_triangles(); ++t)
    out[t] = stress_tensor(law.stress(fe.element_strain(t, u)), fe.components());
  return out;
}

// Shared boundary quantities: discrete traction as a P1 function, jump field,
// pointwise operator-consistency residual.
struct BoundaryContext {
  const CoupledSpaces& sp;
  const ProblemData& data;
  const FrictionData& friction;
  std::vector<Eigen::MatrixXd> stress;
  Vector traction;  // nodal, loop order
  Vector jump;      // nodal jump v, loop order
  Vector d;         // w - u0
  Vector phi;

  Vector nodal(const Vector& f, int e, double s) const {
    const int c = sp.components();
    const int a = sp.boundary.panel_start(e), b = sp.boundary.panel_end(e);
    return (1.0 - s) * f.segment(a * c, c) + s * f.segment(b * c, c);
  }
  double bound(int e, double s) const {
    if (friction.bound) return friction.bound(sp.boundary.panel_point(e, s));
    if (friction.nodal.size() == 0) return 0.0;
    return (1.0 - s) * friction.nodal[sp.boundary.panel_start(e)] + s * friction.nodal[sp.boundary.panel_end(e)];
  }
  // A'(eps(u_h)) nu from the owning triangle
  Vector conormal(int e) const {
    return stress[sp.mesh->boundary_owner(e)] * sp.mesh->boundary_normal(e);
  }
};

BoundaryContext make_context(const CoupledSpaces& sp, const MaterialLaw& law, const ProblemData& data,
                             const FrictionData& friction, const DiscreteSolution& sol, bool layer) {
  BoundaryContext ctx{sp, data, friction, element_stresses(sp.fe, law, sol.u), {}, {}, {}, {}};
  ctx.jump = jump_trace(sp, sol.v);
  const Vector w = sp.fe.trace(sol.u) + ctx.jump;
  ctx.d = w - data.u0_trace;
  const auto& ops = sp.ops;
  Vector functional;
  if (layer) {
    if (sol.phi.size() != ops.V.rows()) throw std::invalid_argument("estimate_lp: solution has no density");
    ctx.phi = sol.phi;
    functional = ops.W * ctx.d - (0.5 * ops.M - ops.K).transpose() * ctx.phi;
  } else {
    ctx.phi = layer_density(sp, data, w);
    functional = ops.S * ctx.d;
  }
  const int nc = static_cast<int>(sol.compat_multiplier.size());
  if (nc > 0) functional += ops.S * (compat_directions(sp, nc) * sol.compat_multiplier);
  ctx.traction = ops.mass.ldlt().solve(functional);
  return ctx;
}

// t0 - (discrete exterior traction) - A'(eps(u_h)) nu at a boundary point.
Vector boundary_residual(const BoundaryContext& ctx, int e, double s) {
  const Point x = ctx.sp.boundary.panel_point(e, s);
  const Point n = ctx.sp.mesh->boundary_normal(e);
  return ctx.data.t0(x, n, e) - ctx.nodal(ctx.traction, e, s) - ctx.conormal(e);
}

// V phi + (1/2 - K) d at a boundary point.
Vector consistency_residual(const BoundaryContext& ctx, int e, double s) {
  return single_layer_at(ctx.sp.boundary, ctx.sp.coeffs, ctx.phi, e, s) + 0.5 * ctx.nodal(ctx.d, e, s) -
         double_layer_at(ctx.sp.boundary, ctx.sp.coeffs, ctx.d, e, s);
}

IndicatorTerm make_term(const std::string& name, Entity entity, Eigen::Index size, double outer,
                        const std::string& exponent) {
  IndicatorTerm t;
  t.name = name;
  t.entity = entity;
  t.local = Vector::Zero(size);
  t.outer = outer;
  t.exponent = exponent;
  return t;
}

void add_volume_and_jump(IndicatorBreakdown& out, const CoupledSpaces& sp, const ProblemData& data,
                         const std::vector<Eigen::MatrixXd>& stress) {
  const Mesh& mesh = *sp.mesh;
  const double pc = conj(out.p), qc = conj(out.q);
  const MeshSize hs = mesh_size(mesh);
  IndicatorTerm vol = make_term("volume", Entity::kElement, mesh.num_triangles(), qc / pc, "h^p' |f|^p' ; ^(q'/p')");
  const auto& rule = triangle_rule(4);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    double acc = 0.0;
    for (std::size_t k = 0; k < rule.weights.size(); ++k)
      acc += rule.weights[k] * std::pow(data.f(triangle_point(mesh, t, rule.barycentric[k])).norm(), pc);
    vol.local[t] = std::pow(hs.h_triangle[t], pc) * 2.0 * mesh.area(t) * acc;
  }
  IndicatorTerm jump = make_term("jump", Entity::kEdge, static_cast<Eigen::Index>(mesh.edges().edges.size()),
                                 qc / pc, "h_E |[A'nu]|^p' ; ^(q'/p')");
  for (int i : mesh.edges().interior) {
    const Edge& e = mesh.edges().edges[i];
    const Point tan = mesh.vertices()[e.b] - mesh.vertices()[e.a];
    const Point n = Point(tan.y(), -tan.x()) / tan.norm();
    const Vector j = (stress[e.left] - stress[e.right]) * n;
    jump.local[i] = e.length * e.length * std::pow(j.norm(), pc);
  }
  out.terms.push_back(std::move(vol));
  out.terms.push_back(std::move(jump));
}

IndicatorTerm consistency_term(const BoundaryContext& ctx, double outer, const std::string& tag) {
  const auto& gl = gauss_legendre(kEdgePoints);
  const int n = ctx.sp.boundary.num_panels();
  IndicatorTerm t = make_term("consistency", Entity::kBoundaryEdge, n, outer, tag);
  for (int e = 0; e < n; ++e) {
    const double h = ctx.sp.boundary.panel_length(e);
    double acc = 0.0;
    for (std::size_t k = 0; k < gl.points.size(); ++k)
      acc += gl.weights[k] * consistency_residual(ctx, e, gl.points[k]).squaredNorm();
    t.local[e] = h * h * acc;
  }
  return t;
}

IndicatorBreakdown estimate_common(const CoupledSpaces& sp, const MaterialLaw& law, const ProblemData& data,
                                   const FrictionData& friction, const DiscreteSolution& sol, bool layer) {
  IndicatorBreakdown out;
  out.p = law.p();
  out.r = law.r();
  out.q = law.q();
  const double qc = conj(out.q), rc = conj(out.r);
  const BoundaryContext ctx = make_context(sp, law, data, friction, sol, layer);
  add_volume_and_jump(out, sp, data, ctx.stress);

  const int n = sp.boundary.num_panels();
  const bool vector = sp.components() == 2;
  IndicatorTerm bres = make_term("boundary_residual", Entity::kBoundaryEdge, n, qc / rc, "h |R|^r' ; ^(q'/r')");
  IndicatorTerm ss = make_term("stick_slip", Entity::kBoundaryEdge, n, 1.0, "|F|v_t| + sigma_t v_t|");
  IndicatorTerm nc = make_term("normal_complementarity", Entity::kBoundaryEdge, n, 1.0, "(sigma_n v_n)_+");
  IndicatorTerm np = make_term("normal_positive", Entity::kBoundaryEdge, n, 1.0 / rc, "h (sigma_n)_+^r' ; ^(1/r')");
  IndicatorTerm te =
      make_term("tangential_excess", Entity::kBoundaryEdge, n, 1.0 / rc, "h (|sigma_t|-F)_+^r' ; ^(1/r')");
  const auto& gl = gauss_legendre(kEdgePoints);
  for (int e = 0; e < n; ++e) {
    const double h = sp.boundary.panel_length(e);
    double acc = 0.0;
    for (std::size_t k = 0; k < gl.points.size(); ++k)
      acc += gl.weights[k] * std::pow(boundary_residual(ctx, e, gl.points[k]).norm(), rc);
    bres.local[e] = h * h * acc;
    if (sp.boundary.panel_label(e) != BoundaryLabel::kSlip) continue;
    const Point nu = sp.mesh->boundary_normal(e);
    const Point tau(-nu.y(), nu.x());
    const Vector sigma = -ctx.conormal(e);
    const double sn = vector ? sigma.dot(nu) : 0.0;
    const double st = vector ? sigma.dot(tau) : sigma[0];
    double a_ss = 0.0, a_nc = 0.0, a_np = 0.0, a_te = 0.0;
    for (std::size_t k = 0; k < gl.points.size(); ++k) {
      const double s = gl.points[k], wq = gl.weights[k] * h;
      const Vector jv = ctx.nodal(ctx.jump, e, s);
      const double vn = vector ? jv.dot(nu) : 0.0;
      const double vt = vector ? jv.dot(tau) : jv[0];
      const double f = ctx.bound(e, s);
      a_ss += wq * (f * std::abs(vt) + st * vt);
      a_nc += wq * std::max(0.0, sn * vn);
      a_np += wq * std::pow(std::max(0.0, sn), rc);
      a_te += wq * std::pow(std::max(0.0, std::abs(st) - f), rc);
    }
    ss.local[e] = std::abs(a_ss);
    nc.local[e] = a_nc;
    np.local[e] = h * a_np;
    te.local[e] = h * a_te;
  }
  out.terms.push_back(std::move(bres));
  out.terms.push_back(std::move(ss));
  if (vector) {
    out.terms.push_back(std::move(nc));
    out.terms.push_back(std::move(np));
  }
  out.terms.push_back(std::move(te));
  out.terms.push_back(consistency_term(ctx, 1.0, "h |V phi + (1/2 - K) d|^2"));
  return out;
}

}  // namespace

std::string entity_name(Entity e) {
  switch (e) {
    case Entity::kElement: return "element";
    case Entity::kEdge: return "edge";
    case Entity::kBoundaryEdge: return "boundary_edge";
  }
  return "unknown";
}

double IndicatorTerm::total() const {
  const double s = local.sum();
  return s <= 0.0 ? 0.0 : std::pow(s, outer);
}

double IndicatorBreakdown::total() const {
  double t = 0.0;
  for (const auto& term : terms) t += term.total();
  return t;
}

bool IndicatorBreakdown::has(const std::string& name) const {
  for (const auto& t : terms)
    if (t.name == name) return true;
  return false;
}

const IndicatorTerm& IndicatorBreakdown::term(const std::string& name) const {
  for (const auto& t : terms)
    if (t.name == name) return t;
  throw std::out_of_range("no estimator term '" + name + "'");
}

Vector IndicatorBreakdown::element_indicators(const Mesh& mesh) const {
  Vector out = Vector::Zero(mesh.num_triangles());
  for (const auto& t : terms) {
    for (Eigen::Index i = 0; i < t.local.size(); ++i) {
      const double v = t.local[i];
      if (v == 0.0) continue;
      switch (t.entity) {
        case Entity::kElement: out[i] += v; break;
        case Entity::kEdge: {
          const Edge& e = mesh.edges().edges[i];
          if (e.right < 0) {
            out[e.left] += v;
          } else {
            out[e.left] += 0.5 * v;
            out[e.right] += 0.5 * v;
          }
          break;
        }
        case Entity::kBoundaryEdge: out[mesh.boundary_owner(static_cast<int>(i))] += v; break;
      }
    }
  }
  return out;
}

IndicatorBreakdown estimate_sp(const CoupledSpaces& spaces, const MaterialLaw& law, const ProblemData& data,
                               const FrictionData& friction, const DiscreteSolution& sol) {
  return estimate_common(spaces, law, data, friction, sol, false);
}

IndicatorBreakdown estimate_lp(const CoupledSpaces& spaces, const MaterialLaw& law, const ProblemData& data,
                               const FrictionData& friction, const DiscreteSolution& sol) {
  return estimate_common(spaces, law, data, friction, sol, true);
}

Eigen::MatrixXd RecoveredGradient::at(const Mesh& mesh, int t, const std::array<double, 3>& bary) const {
  const auto& tr = mesh.triangles()[t];
  const Eigen::RowVectorXd row = bary[0] * nodal.row(tr[0]) + bary[1] * nodal.row(tr[1]) + bary[2] * nodal.row(tr[2]);
  Eigen::MatrixXd g(components, 2);
  for (int c = 0; c < components; ++c) g.row(c) = row.segment(2 * c, 2);
  return g;
}

RecoveredGradient recover_gradient(const FESpace& space, const Vector& u) {
  const Mesh& mesh = space.mesh();
  RecoveredGradient r;
  r.components = space.components();
  r.nodal = Eigen::MatrixXd::Zero(mesh.num_vertices(), 2 * r.components);
  Vector weight = Vector::Zero(mesh.num_vertices());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Eigen::MatrixXd g = space.element_gradient(t, u);
    Eigen::RowVectorXd flat(2 * r.components);
    for (int c = 0; c < r.components; ++c) flat.segment(2 * c, 2) = g.row(c);
    const double a = mesh.area(t);
    for (int v : mesh.triangles()[t]) {
      r.nodal.row(v) += a * flat;
      weight[v] += a;
    }
  }
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (weight[v] > 0.0) r.nodal.row(v) /= weight[v];
  return r;
}

double quasi_norm_kernel(double p, double delta, double a, double b) {
  if (b == 0.0) return 0.0;
  return b * b * std::pow(std::abs(a) + std::abs(b) + delta, p - 2.0);
}

IndicatorBreakdown estimate_scalar_recovery(const CoupledSpaces& spaces, const MaterialLaw& law,
                                            const ProblemData& data, const FrictionData& friction,
                                            const DiscreteSolution& sol, double delta) {
  if (spaces.components() != 1) throw std::invalid_argument("estimate_scalar_recovery: scalar problems only");
  if (law.p() < 2.0) throw std::invalid_argument("estimate_scalar_recovery: needs p >= 2");
  const double p = law.p(), pc = conj(p);
  const Mesh& mesh = *spaces.mesh;
  IndicatorBreakdown out;
  out.p = p;
  out.r = law.r();
  out.q = law.q();
  const MeshSize hs = mesh_size(mesh);
  const RecoveredGradient rg = recover_gradient(spaces.fe, sol.u);
  const auto& rule = triangle_rule(4);
  IndicatorTerm gr = make_term("gradient_recovery", Entity::kElement, mesh.num_triangles(), 1.0, "G_{p,delta}");
  IndicatorTerm os = make_term("data_oscillation", Entity::kElement, mesh.num_triangles(), 1.0, "G_{p',1}");
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Eigen::MatrixXd g = spaces.fe.element_gradient(t, sol.u);
    const double gn = g.norm();
    double fmean = 0.0;
    for (std::size_t k = 0; k < rule.weights.size(); ++k)
      fmean += 2.0 * rule.weights[k] * data.f(triangle_point(mesh, t, rule.barycentric[k]))[0];
    double a_gr = 0.0, a_os = 0.0;
    for (std::size_t k = 0; k < rule.weights.size(); ++k) {
      const double diff = (g - rg.at(mesh, t, rule.barycentric[k])).norm();
      a_gr += rule.weights[k] * quasi_norm_kernel(p, delta, gn, diff);
      const double osc = hs.h_triangle[t] * std::abs(data.f(triangle_point(mesh, t, rule.barycentric[k]))[0] - fmean);
      a_os += rule.weights[k] * quasi_norm_kernel(pc, 1.0, std::pow(gn, p - 1.0), osc);
    }
    gr.local[t] = 2.0 * mesh.area(t) * a_gr;
    os.local[t] = 2.0 * mesh.area(t) * a_os;
  }
  out.terms.push_back(std::move(gr));
  out.terms.push_back(std::move(os));

  const BoundaryContext ctx = make_context(spaces, law, data, friction, sol, false);
  out.terms.push_back(consistency_term(ctx, 1.0, "h |V phi + (1/2 - K) d|^2"));
  const int n = spaces.boundary.num_panels();
  IndicatorTerm bres = make_term("boundary_residual", Entity::kBoundaryEdge, n, 1.0, "h |R|^p'");
  IndicatorTerm fe = make_term("friction_excess", Entity::kBoundaryEdge, n, pc / 2.0, "h (|sigma|-g)_+^2 ; ^(p'/2)");
  IndicatorTerm fd = make_term("friction_deficit", Entity::kBoundaryEdge, n, 1.0, "|(|sigma|-g)_-| |v|");
  IndicatorTerm fs = make_term("friction_sign", Entity::kBoundaryEdge, n, 1.0, "(sigma v)_+");
  const auto& gl = gauss_legendre(kEdgePoints);
  for (int e = 0; e < n; ++e) {
    const double h = spaces.boundary.panel_length(e);
    double acc = 0.0;
    for (std::size_t k = 0; k < gl.points.size(); ++k)
      acc += gl.weights[k] * std::pow(boundary_residual(ctx, e, gl.points[k]).norm(), pc);
    bres.local[e] = h * h * acc;
    if (spaces.boundary.panel_label(e) != BoundaryLabel::kSlip) continue;
    const double sigma = -ctx.conormal(e)[0];
    double a_fe = 0.0, a_fd = 0.0, a_fs = 0.0;
    for (std::size_t k = 0; k < gl.points.size(); ++k) {
      const double s = gl.points[k], wq = gl.weights[k] * h;
      const double v = ctx.nodal(ctx.jump, e, s)[0];
      const double g = ctx.bound(e, s);
      a_fe += wq * std::pow(std::max(0.0, std::abs(sigma) - g), 2.0);
      a_fd += wq * std::max(0.0, g - std::abs(sigma)) * std::abs(v);
      a_fs += wq * std::max(0.0, sigma * v);
    }
    fe.local[e] = h * a_fe;
    fd.local[e] = a_fd;
    fs.local[e] = a_fs;
  }
  out.terms.push_back(std::move(bres));
  out.terms.push_back(std::move(fe));
  out.terms.push_back(std::move(fd));
  out.terms.push_back(std::move(fs));
  return out;
}

void write_indicators_csv(const IndicatorBreakdown& b, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "term,entity,id,value,exponent\n";
  char buf[64];
  for (const auto& t : b.terms) {
    for (Eigen::Index i = 0; i < t.local.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", t.local[i]);
      f << t.name << ',' << entity_name(t.entity) << ',' << i << ',' << buf << ",\"" << t.exponent << "\"\n";
    }
  }
}

}  // namespace febe
