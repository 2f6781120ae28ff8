#include "febe/bem.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "febe/quadrature.hpp"
#include "febe/simd/kernels.hpp"

namespace febe {

namespace {

constexpr double kPi = std::numbers::pi;

struct PairPoint {
  double s;
  double t;
  double w;
};

// Duffy rule on the unit square, singular at the corner (0, 0).
const std::vector<PairPoint>& corner_rule() {
  static const std::vector<PairPoint> rule = [] {
    const LineRule xi = graded_gauss(12, 24, 0.25);
    const LineRule& eta = gauss_legendre(20);
    std::vector<PairPoint> pts;
    pts.reserve(2 * xi.points.size() * eta.points.size());
    for (std::size_t a = 0; a < xi.points.size(); ++a) {
      for (std::size_t b = 0; b < eta.points.size(); ++b) {
        const double x = xi.points[a];
        const double w = xi.weights[a] * eta.weights[b] * x;
        pts.push_back({x, x * eta.points[b], w});
        pts.push_back({x * eta.points[b], x, w});
      }
    }
    return pts;
  }();
  return rule;
}

double segment_distance(const Point& a, const Point& b, const Point& c, const Point& d) {
  auto point_seg = [](const Point& p, const Point& u, const Point& v) {
    const Point e = v - u;
    const double t = std::clamp((p - u).dot(e) / e.squaredNorm(), 0.0, 1.0);
    return (p - (u + t * e)).norm();
  };
  return std::min({point_seg(a, c, d), point_seg(b, c, d), point_seg(c, a, b), point_seg(d, a, b)});
}

int subdivisions(double length, double dist) {
  if (dist <= 0.0) return 32;
  return std::clamp(static_cast<int>(std::ceil(3.0 * length / dist)), 1, 32);
}

std::vector<PairPoint> regular_rule(int order, int mi, int mj) {
  const LineRule& g = gauss_legendre(order);
  std::vector<PairPoint> pts;
  pts.reserve(static_cast<std::size_t>(mi * mj) * order * order);
  for (int a = 0; a < mi; ++a) {
    for (int b = 0; b < mj; ++b) {
      for (int p = 0; p < order; ++p) {
        for (int q = 0; q < order; ++q) {
          pts.push_back({(a + g.points[p]) / mi, (b + g.points[q]) / mj,
                         g.weights[p] * g.weights[q] / (mi * mj)});
        }
      }
    }
  }
  return pts;
}

double poisson_ratio(const ExteriorCoefficients& c) { return c.lambda / (2.0 * (c.lambda + c.mu)); }

double lame_c1(const ExteriorCoefficients& c) {
  return (c.lambda + 3.0 * c.mu) / (4.0 * kPi * c.mu * (c.lambda + 2.0 * c.mu));
}
double lame_c2(const ExteriorCoefficients& c) { return (c.lambda + c.mu) / (c.lambda + 3.0 * c.mu); }
double lame_hyper(const ExteriorCoefficients& c) {
  return c.mu * (c.lambda + c.mu) / (kPi * (c.lambda + 2.0 * c.mu));
}
double lame_cauchy(const ExteriorCoefficients& c) {
  const double nu = poisson_ratio(c);
  return (1.0 - 2.0 * nu) / (4.0 * kPi * (1.0 - nu));
}

// Double layer kernel as a function of d = y - x.
Eigen::MatrixXd double_layer_diff(const ExteriorCoefficients& c, const Point& d, const Point& n) {
  const double r2 = d.squaredNorm();
  if (r2 == 0.0) throw std::invalid_argument("double_layer_kernel: coincident points");
  if (c.scalar) return Eigen::MatrixXd::Constant(1, 1, -d.dot(n) / (2.0 * kPi * r2));
  const double r = std::sqrt(r2);
  const Point rh = d / r;
  const double drdn = rh.dot(n);
  const double nu = poisson_ratio(c);
  const double a = 1.0 - 2.0 * nu;
  Eigen::Matrix2d t;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      t(i, j) = drdn * (a * (i == j) + 2.0 * rh[i] * rh[j]) - a * (rh[i] * n[j] - rh[j] * n[i]);
    }
  }
  return (-1.0 / (4.0 * kPi * (1.0 - nu) * r)) * t;
}

// Matrix (tau_i n_j - tau_j n_i).
Eigen::Matrix2d skew_part(const Point& tau, const Point& n) {
  Eigen::Matrix2d a;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) a(i, j) = tau[i] * n[j] - tau[j] * n[i];
  return a;
}

struct PairBlocks {
  double log_integral = 0.0;                        // int int log(1/r)
  Eigen::Matrix2d dyad = Eigen::Matrix2d::Zero();   // int int rr^T / r^2
  Eigen::MatrixXd k_start;                          // int int T phi_start
  Eigen::MatrixXd k_end;                            // int int T phi_end
};

class Assembler {
 public:
  Assembler(const BoundarySpace& space, const ExteriorCoefficients& coeffs, int order)
      : space_(space), coeffs_(coeffs), order_(order), c_(space.components()) {}

  PairBlocks pair(int i, int j, bool want_log) const {
    PairBlocks b;
    b.k_start = Eigen::MatrixXd::Zero(c_, c_);
    b.k_end = Eigen::MatrixXd::Zero(c_, c_);
    const double hi = space_.panel_length(i);
    const double hj = space_.panel_length(j);
    if (i == j) {
      const Point tau = space_.panel_tangent(i);
      b.log_integral = hi * hi * (1.5 - std::log(hi));
      b.dyad = hi * hi * tau * tau.transpose();
      if (c_ == 2) {
        const Eigen::Matrix2d a = lame_cauchy(coeffs_) * skew_part(tau, space_.panel_normal(i));
        b.k_end = a * (hi / 2.0);
        b.k_start = -a * (hi / 2.0);
      }
      return b;
    }
    const Point a0 = space_.node(space_.panel_start(i));
    const Point a1 = space_.node(space_.panel_end(i));
    const Point b0 = space_.node(space_.panel_start(j));
    const Point b1 = space_.node(space_.panel_end(j));
    const Point ny = space_.panel_normal(j);
    const double jac = hi * hj;
    // Positions are built from the shared vertex so that tiny corner
    // parameters do not round onto it.
    auto accumulate = [&](const Point& d, double t, double w) {
      const double r2 = d.squaredNorm();
      if (want_log) {
        b.log_integral += -0.5 * w * std::log(r2);
        b.dyad += (w / r2) * d * d.transpose();
      }
      const Eigen::MatrixXd k = double_layer_diff(coeffs_, d, ny);
      b.k_start += (w * (1.0 - t)) * k;
      b.k_end += (w * t) * k;
    };
    if (space_.panel_end(i) == j) {
      // shared vertex a1 == b0
      for (const auto& p : corner_rule())
        accumulate(p.t * (b1 - b0) - p.s * (a0 - a1), p.t, jac * p.w);
    } else if (space_.panel_end(j) == i) {
      // shared vertex a0 == b1
      for (const auto& p : corner_rule())
        accumulate(p.t * (b0 - b1) - p.s * (a1 - a0), 1.0 - p.t, jac * p.w);
    } else {
      const double dist = segment_distance(a0, a1, b0, b1);
      const int mi = subdivisions(hi, dist);
      const int mj = subdivisions(hj, dist);
      regular(i, j, mi, mj, want_log, b, accumulate);
    }
    return b;
  }

 private:
  template <class F>
  void regular(int i, int j, int mi, int mj, bool want_log, PairBlocks& b, F& accumulate) const {
    const double jac = space_.panel_length(i) * space_.panel_length(j);
    const Point a0 = space_.node(space_.panel_start(i));
    const Point a1 = space_.node(space_.panel_end(i));
    const Point b0 = space_.node(space_.panel_start(j));
    const Point b1 = space_.node(space_.panel_end(j));
    if (!want_log) {
      for (const auto& p : regular_rule(order_, mi, mj))
        accumulate((b0 + p.t * (b1 - b0)) - (a0 + p.s * (a1 - a0)), p.t, jac * p.w);
      return;
    }
    // Log blocks through the vectorized distance kernel, double layer as usual.
    const LineRule& g = gauss_legendre(order_);
    const Point ny = space_.panel_normal(j);
    const std::size_t nt = static_cast<std::size_t>(mj) * order_;
    std::vector<double> ys(nt), yy(nt), tw(nt), tt(nt), r2(nt);
    for (int bb = 0; bb < mj; ++bb) {
      for (int q = 0; q < order_; ++q) {
        const std::size_t k = static_cast<std::size_t>(bb) * order_ + q;
        tt[k] = (bb + g.points[q]) / mj;
        tw[k] = g.weights[q] / mj;
        const Point y = b0 + tt[k] * (b1 - b0);
        ys[k] = y.x();
        yy[k] = y.y();
      }
    }
    for (int aa = 0; aa < mi; ++aa) {
      for (int p = 0; p < order_; ++p) {
        const double s = (aa + g.points[p]) / mi;
        const double ws = jac * g.weights[p] / mi;
        const Point x = a0 + s * (a1 - a0);
        simd::squared_distances(x.x(), x.y(), ys, yy, r2);
        for (std::size_t k = 0; k < nt; ++k) {
          const double w = ws * tw[k];
          const Point d(ys[k] - x.x(), yy[k] - x.y());
          b.log_integral += -0.5 * w * std::log(r2[k]);
          b.dyad += (w / r2[k]) * d * d.transpose();
          const Eigen::MatrixXd kk = double_layer_kernel(coeffs_, x, Point(ys[k], yy[k]), ny);
          b.k_start += (w * (1.0 - tt[k])) * kk;
          b.k_end += (w * tt[k]) * kk;
        }
      }
    }
  }

  const BoundarySpace& space_;
  const ExteriorCoefficients& coeffs_;
  int order_;
  int c_;
};

// Single-layer kernel block from the log and dyad integrals.
Eigen::MatrixXd single_layer_block(const ExteriorCoefficients& c, double log_integral,
                                   const Eigen::Matrix2d& dyad) {
  if (c.scalar) return Eigen::MatrixXd::Constant(1, 1, log_integral / (2.0 * kPi));
  return lame_c1(c) * (log_integral * Eigen::Matrix2d::Identity() + lame_c2(c) * dyad);
}

Eigen::MatrixXd hypersingular_block(const ExteriorCoefficients& c, double log_integral,
                                    const Eigen::Matrix2d& dyad) {
  if (c.scalar) return Eigen::MatrixXd::Constant(1, 1, log_integral / (2.0 * kPi));
  return lame_hyper(c) * (log_integral * Eigen::Matrix2d::Identity() + dyad);
}

void write_matrix(const Eigen::MatrixXd& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  char buf[32];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

}  // namespace

BoundarySpace::BoundarySpace(std::shared_ptr<const Mesh> mesh, int components)
    : mesh_(std::move(mesh)), components_(components) {
  if (!mesh_) throw std::invalid_argument("BoundarySpace needs a mesh");
  if (components != 1 && components != 2)
    throw std::invalid_argument("BoundarySpace supports 1 or 2 components");
  n_ = static_cast<int>(mesh_->boundary_loop().size());
  length_.resize(n_);
  for (int e = 0; e < n_; ++e) {
    length_[e] = mesh_->boundary_length(e);
    if (!(length_[e] > 0.0)) throw std::invalid_argument("degenerate boundary panel");
  }
  slip_flag_.assign(n_, false);
  for (int k = 0; k < n_; ++k) {
    const int prev = (k + n_ - 1) % n_;
    if (panel_label(prev) == BoundaryLabel::kSlip && panel_label(k) == BoundaryLabel::kSlip) {
      slip_flag_[k] = true;
      slip_nodes_.push_back(k);
    }
  }
}

const Point& BoundarySpace::node(int k) const { return mesh_->vertices()[mesh_->boundary_loop()[k]]; }

Point BoundarySpace::panel_tangent(int e) const {
  return (node(panel_end(e)) - node(panel_start(e))) / length_[e];
}

Point BoundarySpace::panel_normal(int e) const { return mesh_->boundary_normal(e); }

Point BoundarySpace::panel_point(int e, double s) const {
  return node(panel_start(e)) + s * (node(panel_end(e)) - node(panel_start(e)));
}

BoundaryLabel BoundarySpace::panel_label(int e) const { return mesh_->boundary_edges()[e].label; }

double BoundarySpace::lumped_mass(int k) const {
  return 0.5 * (length_[(k + n_ - 1) % n_] + length_[k]);
}

Point BoundarySpace::nodal_normal(int k) const {
  const Point n = panel_normal((k + n_ - 1) % n_) + panel_normal(k);
  return n / n.norm();
}

Eigen::MatrixXd fundamental_solution(const ExteriorCoefficients& c, const Point& x, const Point& y) {
  const Point d = x - y;
  const double r = d.norm();
  if (r == 0.0) throw std::invalid_argument("fundamental_solution: coincident points");
  if (c.scalar) return Eigen::MatrixXd::Constant(1, 1, -std::log(r) / (2.0 * kPi));
  const Eigen::Matrix2d dyad = d * d.transpose() / (r * r);
  return lame_c1(c) * (-std::log(r) * Eigen::Matrix2d::Identity() + lame_c2(c) * dyad);
}

Eigen::MatrixXd double_layer_kernel(const ExteriorCoefficients& c, const Point& x, const Point& y,
                                    const Point& n) {
  return double_layer_diff(c, y - x, n);
}

BoundaryOperators assemble_operators(const BoundarySpace& space, const ExteriorCoefficients& coeffs,
                                     const BemOptions& options) {
  coeffs.validate();
  if ((space.components() == 1) != coeffs.scalar)
    throw std::invalid_argument("exterior coefficients do not match the boundary space");
  if (options.quad_order < 1) throw std::invalid_argument("bem.quad_order must be >= 1");
  if (space.mesh().boundary_diameter() >= 1.0)
    throw std::invalid_argument("boundary diameter must be < 1; apply capacity scaling");
  const int n = space.num_panels();
  const int c = space.components();
  const int nd = n * c;
  Assembler assembler(space, coeffs, options.quad_order);

  BoundaryOperators ops;
  ops.coeffs = coeffs;
  ops.scale = space.mesh().scale();
  ops.half_factor = options.half_factor;
  ops.V = Eigen::MatrixXd::Zero(nd, nd);
  ops.K = Eigen::MatrixXd::Zero(nd, nd);
  Eigen::MatrixXd e_mat = Eigen::MatrixXd::Zero(nd, nd);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const PairBlocks b = assembler.pair(i, j, j >= i);
      const int js = space.panel_start(j);
      const int je = space.panel_end(j);
      ops.K.block(i * c, js * c, c, c) += b.k_start;
      ops.K.block(i * c, je * c, c, c) += b.k_end;
      if (j < i) continue;
      const Eigen::MatrixXd v = single_layer_block(coeffs, b.log_integral, b.dyad);
      const Eigen::MatrixXd e = hypersingular_block(coeffs, b.log_integral, b.dyad);
      ops.V.block(i * c, j * c, c, c) = v;
      ops.V.block(j * c, i * c, c, c) = v.transpose();
      e_mat.block(i * c, j * c, c, c) = e;
      e_mat.block(j * c, i * c, c, c) = e.transpose();
    }
  }
  // Arclength derivative of the piecewise linears, one row per panel.
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(nd, nd);
  ops.M = Eigen::MatrixXd::Zero(nd, nd);
  ops.mass = Eigen::MatrixXd::Zero(nd, nd);
  for (int e = 0; e < n; ++e) {
    const double h = space.panel_length(e);
    const int a = space.panel_start(e);
    const int b = space.panel_end(e);
    for (int k = 0; k < c; ++k) {
      d(e * c + k, a * c + k) -= 1.0 / h;
      d(e * c + k, b * c + k) += 1.0 / h;
      ops.M(e * c + k, a * c + k) += h / 2.0;
      ops.M(e * c + k, b * c + k) += h / 2.0;
      ops.mass(a * c + k, a * c + k) += h / 3.0;
      ops.mass(b * c + k, b * c + k) += h / 3.0;
      ops.mass(a * c + k, b * c + k) += h / 6.0;
      ops.mass(b * c + k, a * c + k) += h / 6.0;
    }
  }
  ops.W = d.transpose() * e_mat * d;
  ops.W = 0.5 * (ops.W + ops.W.transpose());
  ops.S = steklov_poincare(ops);
  return ops;
}

Eigen::MatrixXd steklov_poincare(const BoundaryOperators& ops) {
  const Eigen::MatrixXd b = 0.5 * ops.M - ops.K;
  Eigen::LLT<Eigen::MatrixXd> llt(ops.V);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("single layer matrix is not positive definite");
  Eigen::MatrixXd s = ops.W + b.transpose() * llt.solve(b);
  s = 0.5 * (s + s.transpose());
  if (ops.half_factor) s *= 0.5;
  return s;
}

RigidBodyBasis stabilization_data(const BoundarySpace& space, const BoundaryOperators& ops) {
  const int n = space.num_nodes();
  const int c = space.components();
  const int dim = c == 1 ? 1 : 3;
  RigidBodyBasis rb;
  rb.traces = Eigen::MatrixXd::Zero(n * c, dim);
  Point center = Point::Zero();
  for (int k = 0; k < n; ++k) center += space.node(k);
  center /= n;
  for (int k = 0; k < n; ++k) {
    if (c == 1) {
      rb.traces(k, 0) = 1.0;
      continue;
    }
    const Point x = space.node(k) - center;
    rb.traces(2 * k, 0) = 1.0;
    rb.traces(2 * k + 1, 1) = 1.0;
    rb.traces(2 * k, 2) = -x.y();
    rb.traces(2 * k + 1, 2) = x.x();
  }
  // L2 projection onto constants is the panel average of the linear trace.
  Eigen::MatrixXd proj = Eigen::MatrixXd::Zero(n * c, dim);
  Eigen::VectorXd weight(n * c);
  for (int e = 0; e < n; ++e) {
    for (int k = 0; k < c; ++k) {
      proj.row(e * c + k) =
          0.5 * (rb.traces.row(space.panel_start(e) * c + k) + rb.traces.row(space.panel_end(e) * c + k));
      weight[e * c + k] = space.panel_length(e);
    }
  }
  const Eigen::MatrixXd gram = proj.transpose() * weight.asDiagonal() * proj;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  const Eigen::MatrixXd lt = llt.matrixL().transpose();
  rb.projections = lt.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(proj);
  const int nl = n * c;
  Eigen::MatrixXd r(dim, 2 * nl);
  r.leftCols(nl) = rb.projections.transpose() * (0.5 * ops.M - ops.K);
  r.rightCols(nl) = rb.projections.transpose() * ops.V;
  rb.stabilization = r.transpose() * r;
  return rb;
}

double coercivity_constant(const BoundaryOperators& ops) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(ops.S, ops.mass,
                                                               Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Eigen::VectorXd single_layer_at(const BoundarySpace& space, const ExteriorCoefficients& coeffs,
                                const Eigen::VectorXd& phi, int e, double s, int order) {
  const int c = space.components();
  const int n = space.num_panels();
  const Point x = space.panel_point(e, s);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(c);
  const LineRule graded = graded_gauss(12, 24, 0.25);
  for (int j = 0; j < n; ++j) {
    const Eigen::VectorXd pj = phi.segment(j * c, c);
    const double h = space.panel_length(j);
    if (j == e) {
      const double a = s * h;
      const double b = h - a;
      const double log_int = -(a * std::log(a) + b * std::log(b) - h);  // int log(1/r)
      const Point tau = space.panel_tangent(j);
      out += single_layer_block(coeffs, log_int, h * tau * tau.transpose()) * pj;
      continue;
    }
    auto add = [&](double t, double w) {
      out += (w * h) * fundamental_solution(coeffs, x, space.panel_point(j, t)) * pj;
    };
    if (space.panel_end(j) == e) {
      for (std::size_t q = 0; q < graded.points.size(); ++q) add(1.0 - graded.points[q], graded.weights[q]);
    } else if (space.panel_end(e) == j) {
      for (std::size_t q = 0; q < graded.points.size(); ++q) add(graded.points[q], graded.weights[q]);
    } else {
      const double dist = segment_distance(x, x, space.node(space.panel_start(j)), space.node(space.panel_end(j)));
      const int m = subdivisions(h, dist);
      const LineRule& g = gauss_legendre(order);
      for (int a = 0; a < m; ++a)
        for (int q = 0; q < order; ++q) add((a + g.points[q]) / m, g.weights[q] / m);
    }
  }
  return out;
}

Eigen::VectorXd double_layer_at(const BoundarySpace& space, const ExteriorCoefficients& coeffs,
                                const Eigen::VectorXd& w, int e, double s, int order) {
  const int c = space.components();
  const int n = space.num_panels();
  const Point x = space.panel_point(e, s);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(c);
  const LineRule graded = graded_gauss(12, 24, 0.25);
  for (int j = 0; j < n; ++j) {
    const Eigen::VectorXd ws = w.segment(space.panel_start(j) * c, c);
    const Eigen::VectorXd we = w.segment(space.panel_end(j) * c, c);
    const double h = space.panel_length(j);
    if (j == e) {
      if (c == 2) {
        const double a = s * h;
        const double lg = std::log((h - a) / a);
        const double end_pv = (a / h) * lg + 1.0;
        const double start_pv = (1.0 - a / h) * lg - 1.0;
        const Eigen::Matrix2d k = lame_cauchy(coeffs) * skew_part(space.panel_tangent(j), space.panel_normal(j));
        out += k * (start_pv * ws + end_pv * we);
      }
      continue;
    }
    const Point ny = space.panel_normal(j);
    auto add = [&](double t, double wt) {
      const Eigen::MatrixXd k = double_layer_kernel(coeffs, x, space.panel_point(j, t), ny);
      out += (wt * h) * k * ((1.0 - t) * ws + t * we);
    };
    if (space.panel_end(j) == e) {
      for (std::size_t q = 0; q < graded.points.size(); ++q) add(1.0 - graded.points[q], graded.weights[q]);
    } else if (space.panel_end(e) == j) {
      for (std::size_t q = 0; q < graded.points.size(); ++q) add(graded.points[q], graded.weights[q]);
    } else {
      const double dist = segment_distance(x, x, space.node(space.panel_start(j)), space.node(space.panel_end(j)));
      const int m = subdivisions(h, dist);
      const LineRule& g = gauss_legendre(order);
      for (int a = 0; a < m; ++a)
        for (int q = 0; q < order; ++q) add((a + g.points[q]) / m, g.weights[q] / m);
    }
  }
  return out;
}

void write_operators_csv(const BoundaryOperators& ops, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_matrix(ops.V, dir + "/V.csv");
  write_matrix(ops.K, dir + "/K.csv");
  write_matrix(ops.W, dir + "/W.csv");
  write_matrix(ops.S, dir + "/S.csv");
  write_matrix(ops.M, dir + "/M.csv");
}

}  // namespace febe
