#include "febe/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace febe {

namespace {

struct Quadratic {
  Eigen::MatrixXd H;  // Hessian in z = (u, v)
  Vector b;           // linear term, energy = z'Hz/2 - b'z
  Eigen::MatrixXd B;  // boundary trace of z
  Eigen::MatrixXd C;  // compatibility rows
  Vector c0;
  Eigen::MatrixXd shift;  // interior rigid fields
};

Quadratic build(const CoupledSpaces& sp, const MaterialLaw& law, const ProblemData& data, CompatMode mode,
                const Vector& u_lin) {
  const int c = sp.components();
  const int nu = sp.fe.num_dofs();
  const auto& slip = sp.boundary.slip_nodes();
  const int nv = static_cast<int>(slip.size()) * c;
  const int nb = sp.boundary.linear_dofs();
  Quadratic q;
  q.B = Eigen::MatrixXd::Zero(nb, nu + nv);
  const auto& loop = sp.mesh->boundary_loop();
  for (int k = 0; k < sp.boundary.num_nodes(); ++k)
    for (int j = 0; j < c; ++j) q.B(k * c + j, sp.fe.dof(loop[k], j)) = 1.0;
  for (std::size_t i = 0; i < slip.size(); ++i) {
    const int k = slip[i];
    if (c == 1) {
      q.B(k, nu + static_cast<int>(i)) = 1.0;
    } else {
      const Point n = sp.boundary.nodal_normal(k);
      const Point t(-n.y(), n.x());
      q.B.block(2 * k, nu + 2 * i, 2, 1) = n;
      q.B.block(2 * k, nu + 2 * i + 1, 2, 1) = t;
    }
  }
  q.H = q.B.transpose() * sp.ops.S * q.B;
  q.H.topLeftCorner(nu, nu) += Eigen::MatrixXd(assemble_tangent(sp.fe, law, u_lin));
  q.b = q.B.transpose() * (sp.ops.S * data.u0_trace + data.t0_load);
  q.b.head(nu) += data.load;

  Eigen::MatrixXd r;
  if (mode == CompatMode::kRigid) {
    r = sp.rigid.traces;
  } else if (mode == CompatMode::kSingle) {
    r = sp.rigid.traces.col(0);
    if (c == 2) r.col(0) += sp.rigid.traces.col(1);
  } else {
    r.resize(nb, 0);
  }
  q.C = r.transpose() * sp.ops.S * q.B;
  q.c0 = r.transpose() * sp.ops.S * data.u0_trace;

  // interior extension of the compatibility directions
  Point center = Point::Zero();
  for (int k = 0; k < sp.boundary.num_nodes(); ++k) center += sp.boundary.node(k);
  center /= sp.boundary.num_nodes();
  q.shift = Eigen::MatrixXd::Zero(nu + nv, r.cols());
  for (int v = 0; v < sp.mesh->num_vertices(); ++v) {
    const Point x = sp.mesh->vertices()[v] - center;
    for (int j = 0; j < c; ++j) {
      const int d = sp.fe.dof(v, j);
      if (r.cols() == 0) continue;
      if (c == 1) {
        q.shift(d, 0) = 1.0;
      } else if (mode == CompatMode::kRigid) {
        q.shift(d, j) = 1.0;
        q.shift(d, 2) = j == 0 ? -x.y() : x.x();
      } else {
        q.shift(d, 0) = 1.0;
      }
    }
  }
  return q;
}

double friction_weight(const CoupledSpaces& sp, const FrictionData& fr, int i) {
  const int k = sp.boundary.slip_nodes()[i];
  return sp.boundary.lumped_mass(k) * (fr.nodal.size() > 0 ? fr.nodal[k] : 0.0);
}

OracleResult enumerate(const CoupledSpaces& sp, const MaterialLaw& law, const ProblemData& data,
                       const FrictionData& fr, const OracleOptions& opt) {
  const int c = sp.components();
  const int nu = sp.fe.num_dofs();
  const int ns = sp.num_slip();
  const int nv = ns * c;
  const Quadratic q = build(sp, law, data, opt.compat, Vector::Zero(nu));
  const int nc = static_cast<int>(q.C.rows());

  // For fixed v the optimal (u, lambda) is affine in v: z = z0 + P v.
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(nu + nc, nu + nc);
  kkt.topLeftCorner(nu, nu) = q.H.topLeftCorner(nu, nu);
  kkt.topRightCorner(nu, nc) = q.C.leftCols(nu).transpose();
  kkt.bottomLeftCorner(nc, nu) = q.C.leftCols(nu);
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
  Eigen::MatrixXd rhs(nu + nc, 1 + nv);
  rhs.col(0) << q.b.head(nu), q.c0;
  rhs.rightCols(nv) << -q.H.block(0, nu, nu, nv), -q.C.rightCols(nv);
  const Eigen::MatrixXd sol = lu.solve(rhs);
  Vector z0 = Vector::Zero(nu + nv);
  z0.head(nu) = sol.col(0).head(nu);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(nu + nv, nv);
  P.topRows(nu) = sol.block(0, 1, nu, nv);
  P.bottomRows(nv).setIdentity();
  const Eigen::MatrixXd Hr = P.transpose() * q.H * P;
  const Vector br = P.transpose() * (q.b - q.H * z0);

  const bool contact = c == 2;
  const int states = contact ? 6 : 3;
  long patterns = 1;
  for (int i = 0; i < ns; ++i) patterns *= states;

  OracleResult best;
  best.exact = true;
  best.objective = std::numeric_limits<double>::infinity();
  Vector best_v;
  std::vector<int> normal_fixed(ns), sign(ns);
  for (long pat = 0; pat < patterns; ++pat) {
    long code = pat;
    for (int i = 0; i < ns; ++i) {
      const int s = static_cast<int>(code % states);
      code /= states;
      normal_fixed[i] = contact ? s / 3 : 0;
      sign[i] = s % 3 - 1;  // -1, 0 (stick), +1
    }
    std::vector<int> free;
    Vector lin = Vector::Zero(nv);
    for (int i = 0; i < ns; ++i) {
      const int t = c * i + (c - 1);
      if (contact && !normal_fixed[i]) free.push_back(c * i);
      if (sign[i] != 0) {
        free.push_back(t);
        lin[t] = friction_weight(sp, fr, i) * sign[i];
      }
    }
    Vector v = Vector::Zero(nv);
    if (!free.empty()) {
      const int m = static_cast<int>(free.size());
      Eigen::MatrixXd a(m, m);
      Vector g(m);
      for (int r = 0; r < m; ++r) {
        g[r] = br[free[r]] - lin[free[r]];
        for (int s = 0; s < m; ++s) a(r, s) = Hr(free[r], free[s]);
      }
      const Vector x = a.ldlt().solve(g);
      for (int r = 0; r < m; ++r) v[free[r]] = x[r];
    }
    bool feasible = true;
    for (int i = 0; i < ns && feasible; ++i) {
      if (contact && v[c * i] > opt.feasibility_tol) feasible = false;
      if (sign[i] != 0 && sign[i] * v[c * i + (c - 1)] < -opt.feasibility_tol) feasible = false;
    }
    if (!feasible) continue;
    double obj = 0.5 * v.dot(Hr * v) - br.dot(v);
    for (int i = 0; i < ns; ++i) obj += friction_weight(sp, fr, i) * std::abs(v[c * i + (c - 1)]);
    if (obj < best.objective) {
      best.objective = obj;
      best_v = v;
    }
  }
  best.evaluated = patterns;
  if (!std::isfinite(best.objective)) throw std::runtime_error("oracle: no feasible pattern");
  const Vector z = z0 + P * best_v;
  best.u = z.head(nu);
  best.v = best_v;
  for (int i = 0; i < ns; ++i)
    if (contact && best_v[c * i] > 0.0) best.v[c * i] = 0.0;
  best.objective = objective(sp, law, data, fr, best.u, best.v, true);
  return best;
}

OracleResult subgradient(const CoupledSpaces& sp, const MaterialLaw& law, const ProblemData& data,
                         const FrictionData& fr, const OracleOptions& opt) {
  const int c = sp.components();
  const int nu = sp.fe.num_dofs();
  const int ns = sp.num_slip();
  const int nz = nu + ns * c;
  const MaterialLaw linear(2.0, LawKind::kPLaplace, 0.0, law.mode());
  const Quadratic q = build(sp, linear, data, opt.compat, Vector::Zero(nu));
  // Compatibility is eliminated by z = M y + z_c with rigid interior shifts,
  // which leave the interior energy unchanged.
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(nz, nz);
  Vector zc = Vector::Zero(nz);
  if (q.C.rows() > 0) {
    const Eigen::MatrixXd cs = q.C * q.shift;
    const Eigen::MatrixXd inv = cs.inverse();
    M -= q.shift * inv * q.C;
    zc = q.shift * inv * q.c0;
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M.transpose() * q.H * M, Eigen::EigenvaluesOnly);
  const double alpha0 = 1.0 / std::max(es.eigenvalues().maxCoeff(), 1e-12);

  auto full = [&](const Vector& y) { return Vector(M * y + zc); };
  auto energy = [&](const Vector& z) {
    return objective(sp, law, data, fr, z.head(nu), z.tail(nz - nu), true);
  };
  auto grad = [&](const Vector& z) {
    Vector g = Vector::Zero(nz);
    g.head(nu) = assemble_residual(sp.fe, law, z.head(nu)) - data.load;
    const Vector w = q.B * z;
    g += q.B.transpose() * (sp.ops.S * (w - data.u0_trace) - data.t0_load);
    for (int i = 0; i < ns; ++i) {
      const int t = nu + c * i + (c - 1);
      const double x = z[t];
      g[t] += friction_weight(sp, fr, i) * (x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0));
    }
    return g;
  };

  Vector y = Vector::Zero(nz);
  OracleResult best;
  best.objective = energy(full(y));
  Vector best_z = full(y);
  for (long k = 0; k < opt.subgradient_iters; ++k) {
    const Vector z = full(y);
    const Vector g = M.transpose() * grad(z);
    const double step = alpha0 / std::sqrt(static_cast<double>(k + 1));
    y -= step * g;
    if (c == 2)
      for (int i = 0; i < ns; ++i) y[nu + 2 * i] = std::min(y[nu + 2 * i], 0.0);
    const Vector zn = full(y);
    const double e = energy(zn);
    if (e < best.objective) {
      best.objective = e;
      best_z = zn;
    }
    best.last_step = step;
  }
  best.evaluated = opt.subgradient_iters;
  best.u = best_z.head(nu);
  best.v = best_z.tail(nz - nu);
  return best;
}

}  // namespace

std::vector<int> stick_slip_pattern(const CoupledSpaces& spaces, const Vector& v, double threshold) {
  const int c = spaces.components();
  std::vector<int> out(spaces.num_slip());
  for (int i = 0; i < spaces.num_slip(); ++i) {
    const double t = v[c * i + (c - 1)];
    out[i] = std::abs(t) <= threshold ? 0 : (t > 0 ? 1 : -1);
  }
  return out;
}

OracleResult oracle_vi(const CoupledSpaces& spaces, const MaterialLaw& law, const ProblemData& data,
                       const FrictionData& friction, const OracleOptions& options) {
  const int constrained = spaces.num_slip() * spaces.components();
  OracleResult r;
  if (law.p() == 2.0) {
    if (constrained > options.max_constrained)
      throw std::invalid_argument("oracle: instance has " + std::to_string(constrained) +
                                  " constrained dofs, limit is " + std::to_string(options.max_constrained));
    r = enumerate(spaces, law, data, friction, options);
  } else {
    r = subgradient(spaces, law, data, friction, options);
  }
  const double scale = 1e-10 * (1.0 + r.v.cwiseAbs().maxCoeff());
  r.stick_slip = stick_slip_pattern(spaces, r.v, scale);
  r.contact.assign(spaces.num_slip(), 0);
  if (spaces.components() == 2)
    for (int i = 0; i < spaces.num_slip(); ++i) r.contact[i] = r.v[2 * i] >= -scale ? 1 : 0;
  return r;
}

}  // namespace febe
