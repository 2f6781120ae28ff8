#include "febe/vi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include <Eigen/SparseLU>

namespace febe {

Eigen::MatrixXd compat_directions(const CoupledSpaces& s, int count);

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

double rho(double x, double g) { return g > 0.0 ? std::sqrt(x * x + g * g) - g : std::abs(x); }
double drho(double x, double g) {
  if (g > 0.0) return x / std::sqrt(x * x + g * g);
  return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
}
double d2rho(double x, double g) {
  if (g <= 0.0) return 0.0;
  const double r = std::sqrt(x * x + g * g);
  return g * g / (r * r * r);
}

int compat_count(const CoupledSpaces& s, CompatMode mode) {
  switch (mode) {
    case CompatMode::kRigid: return s.rigid.dimension();
    case CompatMode::kSingle: return 1;
    case CompatMode::kNone: return 0;
  }
  return 0;
}

Point rigid_center(const BoundarySpace& b) {
  Point c = Point::Zero();
  for (int k = 0; k < b.num_nodes(); ++k) c += b.node(k);
  return c / b.num_nodes();
}

// Newton-type minimization of
//   E(z) = int Psi(|eps(u)|) - F.u + boundary(w - u0) - t0.w + j_gamma(v)
// over z = (u, v) with linear equality constraints and sign constraints on
// normal jumps. The boundary part uses S_h or the layer potential block
// system; both give the same Newton directions.
class Problem {
 public:
  Problem(const CoupledSpaces& s, const MaterialLaw& law, const ProblemData& data,
          const FrictionData* friction, const SolverOptions& opt, Formulation form, bool stabilized)
      : s_(s), law_(law), data_(data), opt_(opt), form_(form), stabilized_(stabilized) {
    c_ = s.components();
    nu_ = s.fe.num_dofs();
    slip_ = s.boundary.slip_nodes();
    nv_ = static_cast<int>(slip_.size()) * c_;
    nz_ = nu_ + nv_;
    nb_ = s.boundary.linear_dofs();
    use_contact_ = opt.contact && c_ == 2 && !slip_.empty();
    mass_.resize(slip_.size());
    bound_ = Vector::Zero(static_cast<Eigen::Index>(slip_.size()));
    for (std::size_t i = 0; i < slip_.size(); ++i) {
      mass_[i] = s.boundary.lumped_mass(slip_[i]);
      if (friction) bound_[i] = friction->nodal[slip_[i]];
    }
    use_friction_ = opt.friction && friction && bound_.size() > 0 && bound_.maxCoeff() > 0.0;
    build_trace_map();
    bk_ = 0.5 * s.ops.M - s.ops.K;
    if (form_ == Formulation::kLayerPotential) {
      v_llt_.compute(s.ops.V);
      if (v_llt_.info() != Eigen::Success) throw std::runtime_error("single layer factorization failed");
    }
    build_constraints();
    gscale_ = std::max({data.load.cwiseAbs().maxCoeff(), data.t0_load.cwiseAbs().maxCoeff(),
                        apply_s(data.u0_trace).cwiseAbs().maxCoeff(), 1e-300});
    tol_ = opt.tol > 0.0 ? opt.tol : (law.p() == 2.0 ? 1e-10 : 1e-8);
  }

  int nz() const { return nz_; }
  int nu() const { return nu_; }
  int num_slip() const { return static_cast<int>(slip_.size()); }
  int normal_index(int i) const { return nu_ + c_ * i; }
  int tangent_index(int i) const { return nu_ + c_ * i + (c_ == 2 ? 1 : 0); }
  bool use_contact() const { return use_contact_; }
  bool use_friction() const { return use_friction_; }
  double mass(int i) const { return mass_[i]; }
  double bound(int i) const { return bound_[i]; }
  double tol() const { return tol_; }
  double gscale() const { return gscale_; }
  const Eigen::MatrixXd& constraint() const { return C_; }
  const Vector& constraint_rhs() const { return c0_; }

  Vector trace(const Vector& z) const {
    Vector zj(J_.size());
    for (std::size_t k = 0; k < J_.size(); ++k) zj[k] = z[J_[k]];
    return Bc_ * zj;
  }

  Vector apply_s(const Vector& d) const {
    if (form_ == Formulation::kSteklov) return s_.ops.S * d;
    return s_.ops.W * d + bk_.transpose() * v_llt_.solve(bk_ * d);
  }

  Vector density(const Vector& d) const {
    const Eigen::LLT<Eigen::MatrixXd> llt(s_.ops.V);
    return -(form_ == Formulation::kLayerPotential ? v_llt_.solve(bk_ * d) : llt.solve(bk_ * d));
  }

  // gamma < 0 disables the friction term, gamma = 0 uses |.|.
  double energy(const Vector& z, double gamma, const Vector* lin = nullptr) const {
    const Vector u = z.head(nu_);
    double e = assemble_energy(s_.fe, law_, u) - data_.load.dot(u);
    const Vector w = trace(z);
    const Vector d = w - data_.u0_trace;
    if (form_ == Formulation::kSteklov) {
      e += 0.5 * d.dot(s_.ops.S * d);
    } else {
      const Vector phi = -v_llt_.solve(bk_ * d);
      e += 0.5 * d.dot(s_.ops.W * d) + 0.5 * phi.dot(s_.ops.V * phi);
    }
    e -= data_.t0_load.dot(w);
    if (gamma >= 0.0 && use_friction_) {
      for (int i = 0; i < num_slip(); ++i) e += mass_[i] * bound_[i] * rho(z[tangent_index(i)], gamma);
    }
    if (lin) e += lin->dot(z);
    return e;
  }

  Vector gradient(const Vector& z, double gamma, const Vector* lin = nullptr) const {
    Vector g = Vector::Zero(nz_);
    g.head(nu_) = assemble_residual(s_.fe, law_, z.head(nu_), std::max(2, opt_.quad_order)) - data_.load;
    const Vector d = trace(z) - data_.u0_trace;
    const Vector bg = apply_s(d) - data_.t0_load;
    const Vector gj = Bc_.transpose() * bg;
    for (std::size_t k = 0; k < J_.size(); ++k) g[J_[k]] += gj[k];
    if (gamma >= 0.0 && use_friction_) {
      for (int i = 0; i < num_slip(); ++i) {
        const int t = tangent_index(i);
        g[t] += mass_[i] * bound_[i] * drho(z[t], gamma);
      }
    }
    if (lin) g += *lin;
    return g;
  }

  // Solves the linearized constrained system at z. Returns the step and the
  // equality multipliers of the linearization.
  void newton_step(const Vector& z, double gamma, const std::vector<bool>& fixed, const Vector& g,
                   Vector& dz, Vector& lambda) const {
    const int nc = static_cast<int>(C_.rows());
    const int nphi = form_ == Formulation::kLayerPotential ? s_.boundary.constant_dofs() : 0;
    const int n = nz_ + nphi + nc;
    Triplets trips;
    const SparseMatrix kt = assemble_tangent(s_.fe, law_, z.head(nu_));
    trips.reserve(kt.nonZeros() + J_.size() * J_.size() + 2 * J_.size() * nphi + nphi * nphi +
                  2 * nc * nz_ + nz_);
    for (int col = 0; col < kt.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(kt, col); it; ++it) {
        if (fixed[it.row()] || fixed[it.col()]) continue;
        trips.emplace_back(it.row(), it.col(), it.value());
      }
    }
    if (gamma >= 0.0 && use_friction_) {
      for (int i = 0; i < num_slip(); ++i) {
        const int t = tangent_index(i);
        if (!fixed[t]) trips.emplace_back(t, t, mass_[i] * bound_[i] * d2rho(z[t], gamma));
      }
    }
    const int nj = static_cast<int>(J_.size());
    if (form_ == Formulation::kSteklov) {
      const Eigen::MatrixXd bsb = Bc_.transpose() * s_.ops.S * Bc_;
      for (int a = 0; a < nj; ++a) {
        if (fixed[J_[a]]) continue;
        for (int b = 0; b < nj; ++b) {
          if (!fixed[J_[b]] && bsb(a, b) != 0.0) trips.emplace_back(J_[a], J_[b], bsb(a, b));
        }
      }
    } else {
      Eigen::MatrixXd zz = Bc_.transpose() * s_.ops.W * Bc_;
      Eigen::MatrixXd zp = -(bk_ * Bc_).transpose();
      Eigen::MatrixXd pz = bk_ * Bc_;
      Eigen::MatrixXd pp = s_.ops.V;
      if (stabilized_) {
        const Eigen::MatrixXd rz = s_.rigid.projections.transpose() * bk_ * Bc_;
        const Eigen::MatrixXd rp = s_.rigid.projections.transpose() * s_.ops.V;
        zz += rz.transpose() * rz;
        zp += rz.transpose() * rp;
        pz += rp.transpose() * rz;
        pp += rp.transpose() * rp;
      }
      for (int a = 0; a < nj; ++a) {
        if (fixed[J_[a]]) continue;
        for (int b = 0; b < nj; ++b)
          if (!fixed[J_[b]]) trips.emplace_back(J_[a], J_[b], zz(a, b));
        for (int b = 0; b < nphi; ++b) {
          trips.emplace_back(J_[a], nz_ + b, zp(a, b));
          trips.emplace_back(nz_ + b, J_[a], pz(b, a));
        }
      }
      for (int a = 0; a < nphi; ++a)
        for (int b = 0; b < nphi; ++b) trips.emplace_back(nz_ + a, nz_ + b, pp(a, b));
    }
    for (int r = 0; r < nc; ++r) {
      for (int col = 0; col < nz_; ++col) {
        if (fixed[col] || C_(r, col) == 0.0) continue;
        trips.emplace_back(nz_ + nphi + r, col, C_(r, col));
        trips.emplace_back(col, nz_ + nphi + r, C_(r, col));
      }
    }
    for (int i = 0; i < nz_; ++i)
      if (fixed[i]) trips.emplace_back(i, i, 1.0);

    SparseMatrix a(n, n);
    a.setFromTriplets(trips.begin(), trips.end());
    a.makeCompressed();
    Vector rhs = Vector::Zero(n);
    for (int i = 0; i < nz_; ++i) rhs[i] = fixed[i] ? 0.0 : -g[i];
    if (nphi > 0) {
      // Density residual of the current iterate; zero when phi is eliminated
      // exactly, kept for the linearization.
      rhs.segment(nz_, nphi).setZero();
    }
    if (nc > 0) rhs.tail(nc) = c0_ - C_ * z;
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw std::runtime_error("vi: linear system factorization failed");
    const Vector x = lu.solve(rhs);
    dz = x.head(nz_);
    lambda = x.tail(nc);
  }

  // Rigid motion shift of the interior field restoring C z = c0.
  void restore_constraints(Vector& z) const {
    if (C_.rows() == 0) return;
    const Vector res = c0_ - C_ * z;
    const Eigen::MatrixXd cu = C_ * shift_;
    z += shift_ * cu.fullPivLu().solve(res);
  }

 private:
  void build_trace_map() {
    std::vector<int> jpos(nz_, -1);
    const auto& loop = s_.mesh->boundary_loop();
    std::vector<Eigen::Triplet<double>> entries;  // (row, z index, value)
    for (std::size_t k = 0; k < loop.size(); ++k)
      for (int c = 0; c < c_; ++c) entries.emplace_back(static_cast<int>(k) * c_ + c, s_.fe.dof(loop[k], c), 1.0);
    for (std::size_t i = 0; i < slip_.size(); ++i) {
      const int k = slip_[i];
      if (c_ == 1) {
        entries.emplace_back(k, nu_ + static_cast<int>(i), 1.0);
        continue;
      }
      const Point n = s_.boundary.nodal_normal(k);
      const Point t = s_.nodal_tangent(k);
      for (int r = 0; r < 2; ++r) {
        entries.emplace_back(2 * k + r, nu_ + 2 * static_cast<int>(i), n[r]);
        entries.emplace_back(2 * k + r, nu_ + 2 * static_cast<int>(i) + 1, t[r]);
      }
    }
    for (const auto& e : entries) {
      if (jpos[e.col()] < 0) {
        jpos[e.col()] = static_cast<int>(J_.size());
        J_.push_back(e.col());
      }
    }
    Bc_ = Eigen::MatrixXd::Zero(nb_, static_cast<Eigen::Index>(J_.size()));
    for (const auto& e : entries) Bc_(e.row(), jpos[e.col()]) += e.value();
  }

  void build_constraints() {
    const int nc = compat_count(s_, opt_.compat);
    const Eigen::MatrixXd r = compat_directions(s_, nc);
    C_ = Eigen::MatrixXd::Zero(nc, nz_);
    c0_ = Vector::Zero(nc);
    shift_ = Eigen::MatrixXd::Zero(nz_, nc);
    if (nc == 0) return;
    Eigen::MatrixXd sr(nb_, nc);
    for (int k = 0; k < nc; ++k) sr.col(k) = apply_s(r.col(k));
    const Eigen::MatrixXd cj = sr.transpose() * Bc_;
    for (std::size_t k = 0; k < J_.size(); ++k) C_.col(J_[k]) = cj.col(static_cast<Eigen::Index>(k));
    c0_ = sr.transpose() * data_.u0_trace;
    // interior rigid fields matching the compatibility directions
    const Point center = rigid_center(s_.boundary);
    const Mesh& mesh = *s_.mesh;
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      const Point x = mesh.vertices()[v] - center;
      Eigen::MatrixXd val(c_, s_.rigid.dimension());
      if (c_ == 1) {
        val(0, 0) = 1.0;
      } else {
        val << 1.0, 0.0, -x.y(), 0.0, 1.0, x.x();
      }
      for (int c = 0; c < c_; ++c) {
        if (nc == s_.rigid.dimension()) {
          shift_.row(s_.fe.dof(v, c)) = val.row(c);
        } else {
          shift_(s_.fe.dof(v, c), 0) = c_ == 1 ? val(0, 0) : val(c, 0) + val(c, 1);
        }
      }
    }
  }

  const CoupledSpaces& s_;
  const MaterialLaw& law_;
  const ProblemData& data_;
  const SolverOptions& opt_;
  Formulation form_;
  bool stabilized_;
  int c_ = 1, nu_ = 0, nv_ = 0, nz_ = 0, nb_ = 0;
  std::vector<int> slip_;
  std::vector<double> mass_;
  Vector bound_;
  bool use_contact_ = false;
  bool use_friction_ = false;
  std::vector<int> J_;
  Eigen::MatrixXd Bc_;
  Eigen::MatrixXd bk_;
  Eigen::LLT<Eigen::MatrixXd> v_llt_;
  Eigen::MatrixXd C_;
  Vector c0_;
  Eigen::MatrixXd shift_;
  double gscale_ = 1.0;
  double tol_ = 1e-10;
};

struct NewtonResult {
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
  Vector lambda;
};

// Primal active-set Newton with Armijo backtracking for a fixed smoothing
// parameter. `ineq` lists coordinates constrained to be <= 0, `active` the
// ones currently held at 0, `fixed` coordinates held at 0 throughout.
NewtonResult minimize(const Problem& pb, Vector& z, double gamma, const std::vector<int>& ineq,
                      std::set<int>& active, const std::vector<int>& fixed_list, const Vector* lin,
                      int max_iter, std::vector<EnergyRecord>* history) {
  NewtonResult res;
  const double atol = pb.tol() * pb.gscale();
  double e = pb.energy(z, gamma, lin);
  if (history) history->push_back({gamma, e});
  for (int it = 0; it < max_iter; ++it) {
    res.iterations = it + 1;
    std::vector<bool> fixed(pb.nz(), false);
    for (int i : fixed_list) fixed[i] = true;
    for (int i : active) fixed[i] = true;
    const Vector g = pb.gradient(z, gamma, lin);
    Vector dz, lambda;
    pb.newton_step(z, gamma, fixed, g, dz, lambda);
    res.lambda = lambda;
    Vector r = g;
    if (lambda.size() > 0) r += pb.constraint().transpose() * lambda;
    double rfree = 0.0;
    for (int i = 0; i < pb.nz(); ++i)
      if (!fixed[i]) rfree = std::max(rfree, std::abs(r[i]));
    res.residual = rfree / pb.gscale();
    const double step = dz.cwiseAbs().maxCoeff();
    if (rfree <= atol || step <= 1e-15 * (1.0 + z.cwiseAbs().maxCoeff())) {
      // release the most violated active sign constraint
      int worst = -1;
      double worst_mu = -atol;
      for (int i : active) {
        const double mu = -r[i];
        if (mu < worst_mu) {
          worst_mu = mu;
          worst = i;
        }
      }
      if (worst < 0) {
        res.converged = rfree <= atol || step <= 1e-15 * (1.0 + z.cwiseAbs().maxCoeff());
        return res;
      }
      active.erase(worst);
      continue;
    }
    double amax = 1.0;
    int blocking = -1;
    for (int i : ineq) {
      if (fixed[i] || dz[i] <= 0.0) continue;
      const double a = -z[i] / dz[i];
      if (a < amax) {
        amax = std::max(a, 0.0);
        blocking = i;
      }
    }
    const double slope = g.dot(dz);
    double alpha = amax;
    double e_new = e;
    bool accepted = false;
    if (alpha > 0.0) {
      for (int k = 0; k < 60; ++k) {
        const Vector trial = z + alpha * dz;
        e_new = pb.energy(trial, gamma, lin);
        if (e_new <= e + 1e-4 * alpha * std::min(slope, 0.0) + 1e-15 * std::abs(e)) {
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
    }
    if (accepted) {
      z += alpha * dz;
      e = e_new;
      if (history) history->push_back({gamma, e});
    }
    if (blocking >= 0 && (!accepted || alpha == amax)) {
      z[blocking] = 0.0;
      active.insert(blocking);
      continue;
    }
    if (!accepted) return res;
    for (int i : ineq) z[i] = std::min(z[i], 0.0);
  }
  return res;
}

DiscreteSolution run_solver(const CoupledSpaces& spaces, const MaterialLaw& law, const ProblemData& data,
                            const FrictionData* friction, const SolverOptions& opt, Formulation form,
                            bool stabilized) {
  if ((law.mode() == LawMode::kVector) != (spaces.components() == 1))
    throw std::invalid_argument("material mode does not match the problem dimension");
  Problem pb(spaces, law, data, friction, opt, form, stabilized);
  DiscreteSolution sol;
  Vector z = Vector::Zero(pb.nz());
  if (opt.start) {
    if (opt.start->size() != pb.nz()) throw std::invalid_argument("solver start has the wrong size");
    z = *opt.start;
  }
  std::vector<int> ineq;
  if (pb.use_contact())
    for (int i = 0; i < pb.num_slip(); ++i) ineq.push_back(pb.normal_index(i));
  for (int i : ineq) z[i] = std::min(z[i], 0.0);
  pb.restore_constraints(z);

  std::set<int> active;
  for (int i : ineq)
    if (z[i] == 0.0) active.insert(i);
  NewtonResult nr;
  int iterations = 0;
  if (pb.use_friction()) {
    for (double gamma = opt.gamma_start; gamma >= opt.gamma_min * (1.0 - 1e-12); gamma /= 10.0) {
      nr = minimize(pb, z, gamma, ineq, active, {}, nullptr, opt.max_iter, &sol.history);
      iterations += nr.iterations;
    }
  } else {
    nr = minimize(pb, z, -1.0, ineq, active, {}, nullptr, opt.max_iter, &sol.history);
    iterations += nr.iterations;
  }
  sol.converged = nr.converged;
  sol.residual = nr.residual;
  Vector lambda = nr.lambda;

  // Exact active-set polish for the nonsmooth friction term and the contact set.
  if (opt.polish && (pb.use_friction() || pb.use_contact())) {
    const int ns = pb.num_slip();
    const double vscale = 1.0 + z.tail(pb.nz() - pb.nu()).cwiseAbs().maxCoeff();
    std::vector<int> normal_state(ns, 0);  // 1: contact active
    std::vector<int> slip_sign(ns, 0);     // 0: stick
    for (int i = 0; i < ns; ++i) {
      if (pb.use_contact()) normal_state[i] = active.count(pb.normal_index(i)) ? 1 : 0;
      if (pb.use_friction()) {
        const double vt = z[pb.tangent_index(i)];
        slip_sign[i] = std::abs(vt) <= 1e-6 * vscale ? 0 : (vt > 0 ? 1 : -1);
      }
    }
    const double atol = pb.tol() * pb.gscale();
    for (int round = 0; round < 40; ++round) {
      std::vector<int> fixed;
      Vector lin = Vector::Zero(pb.nz());
      for (int i = 0; i < ns; ++i) {
        if (pb.use_contact() && normal_state[i]) fixed.push_back(pb.normal_index(i));
        if (pb.use_friction()) {
          if (slip_sign[i] == 0) fixed.push_back(pb.tangent_index(i));
          else lin[pb.tangent_index(i)] = pb.mass(i) * pb.bound(i) * slip_sign[i];
        }
      }
      Vector zp = z;
      for (int i : fixed) zp[i] = 0.0;
      pb.restore_constraints(zp);
      std::set<int> none;
      const NewtonResult pr = minimize(pb, zp, -1.0, {}, none, fixed, &lin, opt.max_iter, nullptr);
      iterations += pr.iterations;
      if (!pr.converged) break;
      Vector r = pb.gradient(zp, -1.0);
      if (pr.lambda.size() > 0) r += pb.constraint().transpose() * pr.lambda;
      const double feas = 1e-12 * vscale;
      bool ok = true;
      for (int i = 0; i < ns; ++i) {
        if (pb.use_contact()) {
          const int n = pb.normal_index(i);
          if (normal_state[i] && -r[n] < -atol) {
            normal_state[i] = 0;
            ok = false;
          } else if (!normal_state[i] && zp[n] > feas) {
            normal_state[i] = 1;
            ok = false;
          }
        }
        if (pb.use_friction()) {
          const int t = pb.tangent_index(i);
          const double cap = pb.mass(i) * pb.bound(i);
          if (slip_sign[i] != 0 && slip_sign[i] * zp[t] < -feas) {
            slip_sign[i] = 0;
            ok = false;
          } else if (slip_sign[i] == 0 && std::abs(r[t]) > cap + atol) {
            slip_sign[i] = r[t] > 0 ? -1 : 1;
            ok = false;
          }
        }
      }
      if (ok) {
        z = zp;
        lambda = pr.lambda;
        sol.polished = true;
        sol.converged = true;
        sol.residual = pr.residual;
        break;
      }
    }
  }

  sol.iterations = iterations;
  sol.u = z.head(pb.nu());
  sol.v = z.tail(pb.nz() - pb.nu());
  sol.compat_multiplier = lambda;
  const int ns = pb.num_slip();
  sol.normal_multiplier = Vector::Zero(ns);
  sol.friction_multiplier = Vector::Zero(ns);
  Vector r = pb.gradient(z, -1.0);
  if (lambda.size() > 0) r += pb.constraint().transpose() * lambda;
  for (int i = 0; i < ns; ++i) {
    if (pb.use_contact() && z[pb.normal_index(i)] == 0.0) sol.normal_multiplier[i] = std::max(0.0, -r[pb.normal_index(i)]);
    sol.friction_multiplier[i] = r[pb.tangent_index(i)];
  }
  sol.objective = objective(spaces, law, data, friction ? *friction : FrictionData{}, sol.u, sol.v,
                            pb.use_friction());
  if (form == Formulation::kLayerPotential) sol.phi = pb.density(pb.trace(z) - data.u0_trace);
  return sol;
}

}  // namespace

Eigen::MatrixXd compat_directions(const CoupledSpaces& s, int count) {
  if (count == 0) return Eigen::MatrixXd(s.boundary.linear_dofs(), 0);
  if (count == s.rigid.dimension()) return s.rigid.traces;
  Eigen::MatrixXd r(s.boundary.linear_dofs(), 1);
  r.col(0) = s.rigid.traces.col(0);
  if (s.components() == 2) r.col(0) += s.rigid.traces.col(1);
  return r;
}

Point CoupledSpaces::nodal_tangent(int k) const {
  const Point n = boundary.nodal_normal(k);
  return Point(-n.y(), n.x());
}

CoupledSpaces make_spaces(std::shared_ptr<const Mesh> mesh, const ExteriorCoefficients& coeffs,
                          const BemOptions& options) {
  const int c = coeffs.scalar ? 1 : 2;
  FESpace fe(mesh, c);
  BoundarySpace bs(mesh, c);
  BoundaryOperators ops = assemble_operators(bs, coeffs, options);
  RigidBodyBasis rigid = stabilization_data(bs, ops);
  return CoupledSpaces{mesh, std::move(fe), std::move(bs), std::move(ops), std::move(rigid), coeffs};
}

ProblemData make_problem_data(const CoupledSpaces& spaces, VectorField f, VectorField u0,
                              BoundaryField t0, int quad_order) {
  ProblemData d;
  d.f = std::move(f);
  d.u0 = std::move(u0);
  d.t0 = std::move(t0);
  d.load = assemble_load(spaces.fe, d.f, std::max(2, quad_order));
  const int c = spaces.components();
  d.u0_trace.resize(spaces.boundary.linear_dofs());
  for (int k = 0; k < spaces.boundary.num_nodes(); ++k)
    d.u0_trace.segment(k * c, c) = d.u0(spaces.boundary.node(k));
  d.t0_load = assemble_boundary_load(*spaces.mesh, c, d.t0);
  return d;
}

ProblemData zero_data(const CoupledSpaces& spaces) {
  const int c = spaces.components();
  return make_problem_data(
      spaces, [c](const Point&) { return Vector(Vector::Zero(c)); },
      [c](const Point&) { return Vector(Vector::Zero(c)); },
      [c](const Point&, const Point&, int) { return Vector(Vector::Zero(c)); });
}

FrictionData make_friction(const CoupledSpaces& spaces, std::function<double(const Point&)> bound) {
  FrictionData f;
  f.bound = std::move(bound);
  f.nodal = Vector::Zero(spaces.boundary.num_nodes());
  for (int k = 0; k < spaces.boundary.num_nodes(); ++k) {
    f.nodal[k] = f.bound(spaces.boundary.node(k));
    if (f.nodal[k] < 0.0) throw std::invalid_argument("friction bound must be >= 0");
  }
  return f;
}

Vector jump_trace(const CoupledSpaces& spaces, const Vector& v) {
  const int c = spaces.components();
  Vector out = Vector::Zero(spaces.boundary.linear_dofs());
  const auto& slip = spaces.boundary.slip_nodes();
  for (std::size_t i = 0; i < slip.size(); ++i) {
    const int k = slip[i];
    if (c == 1) {
      out[k] = v[static_cast<Eigen::Index>(i)];
    } else {
      out.segment(2 * k, 2) = v[2 * i] * spaces.boundary.nodal_normal(k) + v[2 * i + 1] * spaces.nodal_tangent(k);
    }
  }
  return out;
}

Vector total_trace(const CoupledSpaces& spaces, const DiscreteSolution& sol) {
  return spaces.fe.trace(sol.u) + jump_trace(spaces, sol.v);
}

double objective(const CoupledSpaces& spaces, const MaterialLaw& law, const ProblemData& data,
                 const FrictionData& friction, const Vector& u, const Vector& v, bool with_friction) {
  const Vector w = spaces.fe.trace(u) + jump_trace(spaces, v);
  const Vector d = w - data.u0_trace;
  double e = assemble_energy(spaces.fe, law, u) - data.load.dot(u) + 0.5 * d.dot(spaces.ops.S * d) -
             data.t0_load.dot(w);
  if (with_friction && friction.nodal.size() > 0) {
    const int c = spaces.components();
    const auto& slip = spaces.boundary.slip_nodes();
    for (std::size_t i = 0; i < slip.size(); ++i) {
      const double vt = v[c * i + (c - 1)];
      e += spaces.boundary.lumped_mass(slip[i]) * friction.nodal[slip[i]] * std::abs(vt);
    }
  }
  return e;
}

DiscreteSolution solve_transmission(const CoupledSpaces& spaces, const MaterialLaw& law,
                                    const ProblemData& data, const SolverOptions& options) {
  SolverOptions opt = options;
  opt.contact = false;
  opt.friction = false;
  return run_solver(spaces, law, data, nullptr, opt, Formulation::kSteklov, false);
}

DiscreteSolution solve_contact_vi(const CoupledSpaces& spaces, const MaterialLaw& law,
                                  const ProblemData& data, const FrictionData& friction,
                                  const SolverOptions& options) {
  return run_solver(spaces, law, data, &friction, options, Formulation::kSteklov, false);
}

DiscreteSolution solve_layerpotential_vi(const CoupledSpaces& spaces, const MaterialLaw& law,
                                         const ProblemData& data, const FrictionData& friction,
                                         bool stabilized, const SolverOptions& options) {
  return run_solver(spaces, law, data, &friction, options, Formulation::kLayerPotential, stabilized);
}

NodalStress nodal_stress(const CoupledSpaces& spaces, const ProblemData& data, const DiscreteSolution& sol) {
  const int c = spaces.components();
  const Vector d = total_trace(spaces, sol) - data.u0_trace;
  Vector shifted = d;
  const int nc = static_cast<int>(sol.compat_multiplier.size());
  if (nc > 0) shifted += compat_directions(spaces, nc) * sol.compat_multiplier;
  const Vector b = spaces.ops.S * shifted - data.t0_load;
  const auto& slip = spaces.boundary.slip_nodes();
  NodalStress out;
  const int ns = static_cast<int>(slip.size());
  out.sigma_n = Vector::Zero(ns);
  out.sigma_t = Vector::Zero(ns);
  out.v_n = Vector::Zero(ns);
  out.v_t = Vector::Zero(ns);
  for (int i = 0; i < ns; ++i) {
    const int k = slip[i];
    const double m = spaces.boundary.lumped_mass(k);
    if (c == 1) {
      out.sigma_t[i] = b[k] / m;
      out.v_t[i] = sol.v[i];
    } else {
      const Eigen::Vector2d sk = b.segment(2 * k, 2) / m;
      out.sigma_n[i] = sk.dot(spaces.boundary.nodal_normal(k));
      out.sigma_t[i] = sk.dot(spaces.nodal_tangent(k));
      out.v_n[i] = sol.v[2 * i];
      out.v_t[i] = sol.v[2 * i + 1];
    }
  }
  return out;
}

double KKTReport::max() const {
  return std::max({normal_stress, normal_gap, normal_complementarity, friction_bound,
                   friction_complementarity});
}

KKTReport kkt_residuals(const CoupledSpaces& spaces, const ProblemData& data, const FrictionData& friction,
                        const DiscreteSolution& sol) {
  const NodalStress st = nodal_stress(spaces, data, sol);
  const auto& slip = spaces.boundary.slip_nodes();
  KKTReport r;
  for (std::size_t i = 0; i < slip.size(); ++i) {
    const double f = friction.nodal.size() > 0 ? friction.nodal[slip[i]] : 0.0;
    if (spaces.components() == 2) {
      r.normal_stress = std::max(r.normal_stress, std::max(0.0, st.sigma_n[i]));
      r.normal_gap = std::max(r.normal_gap, std::max(0.0, st.v_n[i]));
      r.normal_complementarity = std::max(r.normal_complementarity, std::abs(st.sigma_n[i] * st.v_n[i]));
    }
    r.friction_bound = std::max(r.friction_bound, std::max(0.0, std::abs(st.sigma_t[i]) - f));
    r.friction_complementarity =
        std::max(r.friction_complementarity, std::abs(st.sigma_t[i] * st.v_t[i] + f * std::abs(st.v_t[i])));
  }
  return r;
}

Vector layer_density(const CoupledSpaces& spaces, const ProblemData& data, const Vector& w) {
  const Eigen::MatrixXd bk = 0.5 * spaces.ops.M - spaces.ops.K;
  return -spaces.ops.V.llt().solve(bk * (w - data.u0_trace));
}

}  // namespace febe
