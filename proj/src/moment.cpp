#include "mindiag/moment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mindiag {

DensityMatrix::DensityMatrix(const CMatrix& entries, double tol) {
  if (entries.rows() != entries.cols() || entries.rows() == 0) throw DimensionError("density matrix must be square and non-empty");
  CMatrix sym = 0.5 * (entries + entries.adjoint());
  const double trace = sym.trace().real();
  if (std::abs(trace - 1.0) > tol) {
    std::ostringstream os;
    os << "density matrix trace is " << trace << ", expected 1";
    throw std::invalid_argument(os.str());
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues()(0) < -tol) {
    std::ostringstream os;
    os << "density matrix is not positive semidefinite (min eigenvalue " << solver.eigenvalues()(0) << ")";
    throw std::invalid_argument(os.str());
  }
  data_ = std::move(sym);
}

DensityMatrix DensityMatrix::maximally_mixed(Eigen::Index dim) {
  return DensityMatrix(CMatrix(CMatrix::Identity(dim, dim) / static_cast<double>(dim)));
}

DensityMatrix DensityMatrix::pure(const CVector& v) {
  const double norm2 = v.squaredNorm();
  if (!(norm2 > 0.0)) throw std::invalid_argument("pure state needs a nonzero vector");
  return DensityMatrix(CMatrix(v * v.adjoint() / norm2));
}

MomentVector::MomentVector(RVector v) : v_(std::move(v)) {
  if (v_.size() == 0) throw DimensionError("moment vector must be non-empty");
  if (std::abs(v_.sum() - 1.0) > 1e-10) {
    std::ostringstream os;
    os << "moment vector sums to " << v_.sum() << ", expected 1";
    throw std::invalid_argument(os.str());
  }
  if (v_.minCoeff() < -1e-12) throw std::invalid_argument("moment vector has a negative coordinate");
}

MomentVector moment_element(const EigenspaceBasis& q, const DensityMatrix& r) {
  if (r.dim() != q.multiplicity()) {
    std::ostringstream os;
    os << "density of size " << r.dim() << " does not match subspace dimension " << q.multiplicity();
    throw DimensionError(os.str());
  }
  const CMatrix y = q.columns * r.matrix() * q.columns.adjoint();
  return MomentVector(y.diagonal().real());
}

RVector jnr_point(const EigenspaceBasis& s, const DensityMatrix& rho, std::span<const Eigen::Index> indices) {
  const Eigen::Index n = s.ambient_dim();
  if (rho.dim() != n) throw DimensionError("density matrix must live on the ambient space");
  const CMatrix projector = s.columns * s.columns.adjoint();
  const CMatrix compressed = projector * rho.matrix() * projector;
  RVector out(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j) {
    const Eigen::Index k = indices[j];
    if (k < 0 || k >= n) {
      std::ostringstream os;
      os << "basis index " << k << " out of range [0, " << n << ")";
      throw std::out_of_range(os.str());
    }
    // tr(P E_k P rho) = (P rho P)_{kk}
    out(static_cast<Eigen::Index>(j)) = compressed(k, k).real();
  }
  return out;
}

namespace {

struct Atom {
  std::size_t block;
  CVector u;   // unit vector in block coordinates
  RVector p;   // signed, folded moment of u u^*
  double weight;
};

class MomentProgram {
 public:
  MomentProgram(const std::vector<MomentBlock>& blocks, const MomentProgramOptions& opt) : blocks_(blocks), opt_(opt) {
    if (blocks_.empty()) throw std::invalid_argument("moment program needs at least one block");
    ambient_ = blocks_.front().basis.rows();
    for (const auto& b : blocks_) {
      if (b.basis.rows() != ambient_) throw DimensionError("all blocks must share the ambient dimension");
      if (b.basis.cols() == 0) throw DimensionError("empty subspace basis");
      if (b.group < 0) throw std::invalid_argument("negative group index");
      groups_ = std::max(groups_, b.group + 1);
    }
    if (opt_.coordinate_map.size() > 0) {
      if (opt_.coordinate_map.cols() != ambient_) throw DimensionError("coordinate map must have one column per ambient coordinate");
      out_dim_ = opt_.coordinate_map.rows();
      mapped_ = true;
    } else {
      out_dim_ = ambient_;
    }
    std::vector<Eigen::Index> group_dims(static_cast<std::size_t>(groups_), 0);
    for (const auto& b : blocks_) group_dims[static_cast<std::size_t>(b.group)] += b.basis.cols();
    for (int g = 0; g < groups_; ++g)
      if (group_dims[static_cast<std::size_t>(g)] == 0) throw std::invalid_argument("every group needs a block");
    // Start at the barycenter of each group: uniform weight on every basis column.
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const double w = 1.0 / static_cast<double>(group_dims[static_cast<std::size_t>(blocks_[b].group)]);
      for (Eigen::Index j = 0; j < blocks_[b].basis.cols(); ++j) {
        CVector u = CVector::Zero(blocks_[b].basis.cols());
        u(j) = 1.0;
        add_atom(b, u, w);
      }
    }
    recompute_residual();
  }

  MomentProgramResult run() {
    MomentProgramResult res;
    double f = residual_.squaredNorm();
    res.objective_trace.push_back(f);
    int next_polish = 20;
    int it = 0;
    double gap = 0.0;
    for (;; ++it) {
      std::vector<Lmo> lmo = linear_oracles();
      gap = duality_gap(lmo);
      if (std::sqrt(f) <= opt_.zero_tol) {
        res.converged = res.zero_reached = true;
        break;
      }
      if (gap <= std::max(opt_.gap_abs_tol, opt_.gap_rel_tol * f) && f - 0.5 * gap > 0.0) {
        res.converged = true;
        break;
      }
      if (opt_.polish && it >= next_polish) {
        next_polish *= 4;
        if (f - gap <= 0.0 && try_polish()) {
          f = residual_.squaredNorm();
          res.objective_trace.push_back(f);
          gap = duality_gap(linear_oracles());
          res.converged = res.zero_reached = true;
          break;
        }
        if ((f - 0.5 * gap > 0.0 && try_separated_newton(f, gap)) || try_barrier(f, gap)) {
          f = residual_.squaredNorm();
          res.objective_trace.push_back(f);
          continue;
        }
      }
      if (it >= opt_.max_iters) break;
      for (int g = 0; g < groups_; ++g) pairwise_step(g, lmo[static_cast<std::size_t>(g)]);
      compact();
      // Exact arithmetic never increases f; guard against rounding drift.
      const double f_new = residual_.squaredNorm();
      f = std::min(f, f_new);
      res.objective_trace.push_back(f_new);
    }
    if (!res.converged && opt_.polish && try_polish()) {
      res.objective_trace.push_back(residual_.squaredNorm());
      gap = duality_gap(linear_oracles());
      res.converged = res.zero_reached = true;
    }
    res.iterations = it;
    const std::vector<Lmo> final_lmo = linear_oracles();
    res.gap = std::max(duality_gap(final_lmo), 0.0);
    for (const auto& l : final_lmo) res.oracle_values.push_back(l.value);
    res.residual = residual_;
    res.objective = residual_.squaredNorm();
    res.states = states();
    return res;
  }

 private:
  struct Lmo {
    std::size_t block;
    CVector u;
    double value;  // min eigenvalue of sign_b Q_b^* Diag(r) Q_b
  };

  RVector fold(const RVector& ambient) const {
    if (!mapped_) return ambient;
    return opt_.coordinate_map * ambient;
  }

  RVector unfold(const RVector& r) const {
    if (!mapped_) return r;
    return opt_.coordinate_map.transpose() * r;
  }

  RVector moment_of(std::size_t b, const CVector& u) const {
    const CVector qu = blocks_[b].basis * u;
    return blocks_[b].sign * fold(qu.cwiseAbs2());
  }

  void add_atom(std::size_t b, const CVector& u, double w) { atoms_.push_back(Atom{b, u, moment_of(b, u), w}); }

  void recompute_residual() {
    residual_ = RVector::Zero(out_dim_);
    for (const auto& a : atoms_) residual_ += a.weight * a.p;
  }

  std::vector<Lmo> linear_oracles() const {
    std::vector<Lmo> out(static_cast<std::size_t>(groups_));
    std::vector<bool> seen(static_cast<std::size_t>(groups_), false);
    const RVector r_amb = unfold(residual_);
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const CMatrix& q = blocks_[b].basis;
      const CMatrix g = blocks_[b].sign * (q.adjoint() * r_amb.cast<Complex>().asDiagonal() * q);
      Eigen::SelfAdjointEigenSolver<CMatrix> solver(0.5 * (g + g.adjoint()));
      const double value = solver.eigenvalues()(0);
      const auto gi = static_cast<std::size_t>(blocks_[b].group);
      if (!seen[gi] || value < out[gi].value) {
        out[gi] = Lmo{b, solver.eigenvectors().col(0), value};
        seen[gi] = true;
      }
    }
    return out;
  }

  // Sum over groups of <grad f, W_g - S_g> with grad f = 2 r.
  double duality_gap(const std::vector<Lmo>& lmo) const {
    std::vector<double> inner(static_cast<std::size_t>(groups_), 0.0);
    for (const auto& a : atoms_) inner[static_cast<std::size_t>(blocks_[a.block].group)] += a.weight * residual_.dot(a.p);
    double gap = 0.0;
    for (int g = 0; g < groups_; ++g) gap += 2.0 * (inner[static_cast<std::size_t>(g)] - lmo[static_cast<std::size_t>(g)].value);
    return gap;
  }

  std::size_t find_or_insert(const Lmo& s) {
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      if (atoms_[i].block != s.block) continue;
      if (std::abs(atoms_[i].u.dot(s.u)) > 1.0 - 1e-13) return i;
    }
    add_atom(s.block, s.u, 0.0);
    return atoms_.size() - 1;
  }

  void pairwise_step(int group, const Lmo& lmo) {
    const std::size_t s = find_or_insert(lmo);
    std::size_t away = atoms_.size();
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      if (blocks_[atoms_[i].block].group != group || atoms_[i].weight <= 0.0 || i == s) continue;
      const double v = residual_.dot(atoms_[i].p);
      if (v > best) {
        best = v;
        away = i;
      }
    }
    if (away == atoms_.size()) return;
    const RVector d = atoms_[s].p - atoms_[away].p;
    const double slope = residual_.dot(d);
    const double curvature = d.squaredNorm();
    if (slope >= 0.0 || curvature <= 0.0) return;
    const double gamma_max = atoms_[away].weight;
    const double gamma = std::min(gamma_max, -slope / curvature);
    atoms_[s].weight += gamma;
    if (gamma >= gamma_max) {
      atoms_[away].weight = 0.0;
    } else {
      atoms_[away].weight -= gamma;
    }
    residual_ += gamma * d;
  }

  // Drops empty atoms and re-expresses overgrown blocks through the
  // eigendecomposition of their state; moments are linear in W, so the
  // residual is unchanged.
  void compact() {
    atoms_.erase(std::remove_if(atoms_.begin(), atoms_.end(), [](const Atom& a) { return a.weight <= 0.0; }), atoms_.end());
    bool changed = false;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const auto dim = static_cast<std::size_t>(blocks_[b].basis.cols());
      const auto count = std::count_if(atoms_.begin(), atoms_.end(), [b](const Atom& a) { return a.block == b; });
      if (static_cast<std::size_t>(count) <= 2 * dim + 4) continue;
      const CMatrix w = state_of(b);
      atoms_.erase(std::remove_if(atoms_.begin(), atoms_.end(), [b](const Atom& a) { return a.block == b; }), atoms_.end());
      Eigen::SelfAdjointEigenSolver<CMatrix> solver(w);
      for (Eigen::Index j = 0; j < solver.eigenvalues().size(); ++j) {
        const double lam = solver.eigenvalues()(j);
        if (lam > 0.0) add_atom(b, solver.eigenvectors().col(j), lam);
      }
      changed = true;
    }
    if (changed) recompute_residual();
  }

  CMatrix state_of(std::size_t b) const {
    const Eigen::Index dim = blocks_[b].basis.cols();
    CMatrix w = CMatrix::Zero(dim, dim);
    for (const auto& a : atoms_)
      if (a.block == b) w += a.weight * a.u * a.u.adjoint();
    return 0.5 * (w + w.adjoint());
  }

  std::vector<CMatrix> states() const {
    std::vector<CMatrix> out;
    out.reserve(blocks_.size());
    for (std::size_t b = 0; b < blocks_.size(); ++b) out.push_back(state_of(b));
    return out;
  }

  // Gauss-Newton (Levenberg-Marquardt damped) solve of the feasibility
  // system in factored form W_b = L_b L_b^*, starting from the current
  // states. Replaces the atoms only when the residual reaches zero_tol.
  bool try_polish() {
    std::vector<CMatrix> factors;
    Eigen::Index params = 0;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      Eigen::SelfAdjointEigenSolver<CMatrix> solver(state_of(b));
      const RVector root = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
      factors.push_back(solver.eigenvectors() * root.cast<Complex>().asDiagonal() * solver.eigenvectors().adjoint());
      params += 2 * factors.back().size();
    }
    const Eigen::Index rows = out_dim_ + groups_;

    auto evaluate = [&](const std::vector<CMatrix>& l, RVector& res, RMatrix* jac) {
      res = RVector::Zero(rows);
      if (jac) jac->setZero(rows, params);
      Eigen::Index offset = 0;
      for (std::size_t b = 0; b < blocks_.size(); ++b) {
        const CMatrix& q = blocks_[b].basis;
        const double sign = blocks_[b].sign;
        const Eigen::Index s = q.cols();
        const CMatrix m = q * l[b];
        res.head(out_dim_) += sign * fold(m.rowwise().squaredNorm());
        res(out_dim_ + blocks_[b].group) += l[b].squaredNorm();
        if (jac) {
          for (Eigen::Index j = 0; j < s; ++j) {
            for (Eigen::Index i = 0; i < s; ++i) {
              const Eigen::Index re_col = offset + 2 * (j * s + i);
              const CVector t = m.col(j).conjugate().cwiseProduct(q.col(i));
              jac->block(0, re_col, out_dim_, 1) += 2.0 * sign * fold(t.real());
              jac->block(0, re_col + 1, out_dim_, 1) -= 2.0 * sign * fold(t.imag());
              (*jac)(out_dim_ + blocks_[b].group, re_col) += 2.0 * l[b](i, j).real();
              (*jac)(out_dim_ + blocks_[b].group, re_col + 1) += 2.0 * l[b](i, j).imag();
            }
          }
        }
        offset += 2 * l[b].size();
      }
      res.tail(groups_).array() -= 1.0;
    };

    RVector res;
    RMatrix jac;
    evaluate(factors, res, &jac);
    double norm = res.norm();
    double damping = 1e-10 * std::max(1.0, jac.squaredNorm());
    for (int it = 0; it < 60 && norm > 0.25 * opt_.zero_tol; ++it) {
      const RMatrix jjt = jac * jac.transpose() + damping * RMatrix::Identity(rows, rows);
      const RVector step = -jac.transpose() * jjt.ldlt().solve(res);
      std::vector<CMatrix> trial = factors;
      Eigen::Index offset = 0;
      for (auto& l : trial) {
        const Eigen::Index s = l.rows();
        for (Eigen::Index j = 0; j < s; ++j)
          for (Eigen::Index i = 0; i < s; ++i) {
            const Eigen::Index c = offset + 2 * (j * s + i);
            l(i, j) += Complex(step(c), step(c + 1));
          }
        offset += 2 * l.size();
      }
      RVector trial_res;
      evaluate(trial, trial_res, nullptr);
      if (trial_res.norm() < norm) {
        factors = std::move(trial);
        evaluate(factors, res, &jac);
        norm = res.norm();
        damping = std::max(damping * 0.1, 1e-16);
      } else {
        damping *= 10.0;
        if (damping > 1e6) break;
      }
    }

    // Exact unit traces per group, then re-check the moment residual.
    std::vector<double> traces(static_cast<std::size_t>(groups_), 0.0);
    for (std::size_t b = 0; b < blocks_.size(); ++b) traces[static_cast<std::size_t>(blocks_[b].group)] += factors[b].squaredNorm();
    std::vector<Atom> polished;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const double t = traces[static_cast<std::size_t>(blocks_[b].group)];
      if (!(t > 0.0)) return false;
      CMatrix w = factors[b] * factors[b].adjoint() / t;
      Eigen::SelfAdjointEigenSolver<CMatrix> solver(0.5 * (w + w.adjoint()));
      for (Eigen::Index j = 0; j < solver.eigenvalues().size(); ++j) {
        const double lam = solver.eigenvalues()(j);
        if (lam > 0.0) polished.push_back(Atom{b, solver.eigenvectors().col(j), moment_of(b, solver.eigenvectors().col(j)), lam});
      }
    }
    // Renormalize weights so each group sums to exactly one after clipping.
    std::vector<double> sums(static_cast<std::size_t>(groups_), 0.0);
    for (const auto& a : polished) sums[static_cast<std::size_t>(blocks_[a.block].group)] += a.weight;
    RVector r = RVector::Zero(out_dim_);
    for (auto& a : polished) {
      a.weight /= sums[static_cast<std::size_t>(blocks_[a.block].group)];
      r += a.weight * a.p;
    }
    if (r.norm() > opt_.zero_tol) return false;
    atoms_ = std::move(polished);
    residual_ = r;
    return true;
  }

  struct PureOptimum {
    std::vector<std::size_t> block;  // per group
    std::vector<CVector> u;          // per group, bottom eigenvector
    RVector moment;                  // sum over groups of the signed folded moments
    RMatrix jacobian;                // d moment / d r
    bool ok = true;
  };

  // For every group the minimizer of <r, signed moment> over its set is the
  // pure state on the bottom eigenvector of sign_b Q_b^* Diag(r) Q_b; with a
  // simple bottom eigenvalue it depends smoothly on r.
  PureOptimum pure_optimum(const RVector& r) const {
    PureOptimum out;
    out.moment = RVector::Zero(out_dim_);
    out.jacobian = RMatrix::Zero(out_dim_, out_dim_);
    const RVector r_amb = unfold(r);
    for (int g = 0; g < groups_; ++g) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_b = 0;
      Eigen::SelfAdjointEigenSolver<CMatrix> best_solver;
      for (std::size_t b = 0; b < blocks_.size(); ++b) {
        if (blocks_[b].group != g) continue;
        const CMatrix& q = blocks_[b].basis;
        const CMatrix h = blocks_[b].sign * (q.adjoint() * r_amb.cast<Complex>().asDiagonal() * q);
        Eigen::SelfAdjointEigenSolver<CMatrix> solver(0.5 * (h + h.adjoint()));
        if (solver.eigenvalues()(0) < best) {
          best = solver.eigenvalues()(0);
          best_b = b;
          best_solver = solver;
        }
      }
      // A rival block or a second eigenvalue close to the bottom makes the
      // minimizer non-smooth; give up.
      for (std::size_t b = 0; b < blocks_.size(); ++b) {
        if (blocks_[b].group != g || b == best_b) continue;
        const CMatrix& q = blocks_[b].basis;
        const CMatrix h = blocks_[b].sign * (q.adjoint() * r_amb.cast<Complex>().asDiagonal() * q);
        Eigen::SelfAdjointEigenSolver<CMatrix> solver(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
        if (solver.eigenvalues()(0) - best < 1e-8 * (1.0 + r.norm())) out.ok = false;
      }
      const RVector& lam = best_solver.eigenvalues();
      const CMatrix& vec = best_solver.eigenvectors();
      if (lam.size() > 1 && lam(1) - lam(0) < 1e-8 * (1.0 + r.norm())) out.ok = false;
      if (!out.ok) return out;
      const MomentBlock& blk = blocks_[best_b];
      const CVector u = vec.col(0);
      const CVector qu = blk.basis * u;
      out.block.push_back(best_b);
      out.u.push_back(u);
      out.moment += blk.sign * fold(qu.cwiseAbs2());
      // First-order perturbation of the bottom eigenvector in direction e_i.
      // Column i of du holds the derivative of u along r + t e_i.
      const CMatrix qv = blk.basis * vec;
      CMatrix du = CMatrix::Zero(u.size(), out_dim_);
      for (Eigen::Index k = 1; k < lam.size(); ++k) {
        const CVector t = qv.col(k).conjugate().cwiseProduct(qv.col(0));
        const CVector c = mapped_ ? CVector(opt_.coordinate_map.cast<Complex>() * t) : t;
        du -= vec.col(k) * (blk.sign / (lam(k) - lam(0)) * c).transpose();
      }
      const CMatrix qdu = blk.basis * du;
      for (Eigen::Index i = 0; i < out_dim_; ++i) {
        const RVector dm_amb = 2.0 * qu.conjugate().cwiseProduct(qdu.col(i)).real();
        out.jacobian.col(i) += blk.sign * fold(dm_amb);
      }
    }
    return out;
  }

  // Newton's method on r = G(r), G(r) the summed pure optimum. The fixed
  // point is the optimal residual when the optimal states are pure and
  // nondegenerate. Accepted only when it lowers both f and the gap.
  bool try_separated_newton(double f, double gap) {
    RVector r = residual_;
    PureOptimum p = pure_optimum(r);
    if (!p.ok) return false;
    double norm = (r - p.moment).norm();
    for (int it = 0; it < 40 && norm > 1e-15 * (1.0 + r.norm()); ++it) {
      const RMatrix j = RMatrix::Identity(out_dim_, out_dim_) - p.jacobian;
      const RVector step = j.fullPivLu().solve(r - p.moment);
      if (!step.allFinite()) return false;
      // Backtrack on ||r - G(r)||.
      double t = 1.0;
      bool moved = false;
      for (int k = 0; k < 30 && !moved; ++k, t *= 0.5) {
        const RVector trial = r - t * step;
        PureOptimum pt = pure_optimum(trial);
        if (!pt.ok) continue;
        const double trial_norm = (trial - pt.moment).norm();
        if (trial_norm < (1.0 - 1e-4 * t) * norm) {
          r = trial;
          p = std::move(pt);
          norm = trial_norm;
          moved = true;
        }
      }
      if (!moved) break;
    }
    std::vector<Atom> saved = std::move(atoms_);
    const RVector saved_residual = residual_;
    atoms_.clear();
    for (std::size_t g = 0; g < p.u.size(); ++g) add_atom(p.block[g], p.u[g], 1.0);
    recompute_residual();
    const double f_new = residual_.squaredNorm();
    const double gap_new = duality_gap(linear_oracles());
    if (f_new <= f && gap_new < gap) return true;
    atoms_ = std::move(saved);
    residual_ = saved_residual;
    return false;
  }

  // Real coordinates of a Hermitian s x s matrix: the diagonal, then the
  // real and imaginary parts of the strict upper triangle. E_p denotes the
  // matching basis, with tr(G E_p) = dual_coords(G)_p.
  static Eigen::Index herm_params(Eigen::Index s) { return s * s; }

  static CMatrix from_coords(const RVector& theta, Eigen::Index at, Eigen::Index s) {
    CMatrix w(s, s);
    for (Eigen::Index i = 0; i < s; ++i) w(i, i) = theta(at++);
    for (Eigen::Index i = 0; i < s; ++i)
      for (Eigen::Index j = i + 1; j < s; ++j) {
        w(i, j) = Complex(theta(at), theta(at + 1));
        w(j, i) = std::conj(w(i, j));
        at += 2;
      }
    return w;
  }

  static void to_coords(const CMatrix& w, RVector& theta, Eigen::Index at) {
    const Eigen::Index s = w.rows();
    for (Eigen::Index i = 0; i < s; ++i) theta(at++) = w(i, i).real();
    for (Eigen::Index i = 0; i < s; ++i)
      for (Eigen::Index j = i + 1; j < s; ++j) {
        theta(at++) = w(i, j).real();
        theta(at++) = w(i, j).imag();
      }
  }

  static void dual_coords(const CMatrix& g, RVector& out, Eigen::Index at) {
    const Eigen::Index s = g.rows();
    for (Eigen::Index i = 0; i < s; ++i) out(at++) = g(i, i).real();
    for (Eigen::Index i = 0; i < s; ++i)
      for (Eigen::Index j = i + 1; j < s; ++j) {
        out(at++) = 2.0 * g(i, j).real();
        out(at++) = 2.0 * g(i, j).imag();
      }
  }

  // Primal barrier path following for min ||M(W)||^2 - mu sum log det W_b
  // under the group trace constraints, warm-started near the current
  // states. Handles optimal states of any rank. Accepted only when it lowers
  // both f and the gap.
  bool try_barrier(double f, double gap) {
    const std::size_t nb = blocks_.size();
    std::vector<Eigen::Index> start(nb);
    Eigen::Index params = 0;
    double nu = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      start[b] = params;
      params += herm_params(blocks_[b].basis.cols());
      nu += static_cast<double>(blocks_[b].basis.cols());
    }
    if (params > 400) return false;

    RMatrix m = RMatrix::Zero(out_dim_, params);
    RMatrix c = RMatrix::Zero(groups_, params);
    std::vector<double> group_dim(static_cast<std::size_t>(groups_), 0.0);
    for (std::size_t b = 0; b < nb; ++b) {
      const CMatrix& q = blocks_[b].basis;
      const Eigen::Index s = q.cols();
      const double sign = blocks_[b].sign;
      Eigen::Index col = start[b];
      for (Eigen::Index i = 0; i < s; ++i) {
        m.col(col) = sign * fold(q.col(i).cwiseAbs2());
        c(blocks_[b].group, col) = 1.0;
        ++col;
      }
      for (Eigen::Index i = 0; i < s; ++i)
        for (Eigen::Index j = i + 1; j < s; ++j) {
          const CVector prod = q.col(i).cwiseProduct(q.col(j).conjugate());
          m.col(col++) = sign * fold(2.0 * prod.real());
          m.col(col++) = sign * fold(-2.0 * prod.imag());
        }
      group_dim[static_cast<std::size_t>(blocks_[b].group)] += static_cast<double>(s);
    }
    const RMatrix mtm = m.transpose() * m;

    RVector theta(params);
    for (std::size_t b = 0; b < nb; ++b) {
      const Eigen::Index s = blocks_[b].basis.cols();
      const double mix = 0.01;
      const CMatrix w = (1.0 - mix) * state_of(b) +
                        mix / group_dim[static_cast<std::size_t>(blocks_[b].group)] * CMatrix::Identity(s, s);
      to_coords(w, theta, start[b]);
    }

    // Returns false when some W_b is not positive definite.
    auto barrier_value = [&](const RVector& t, double& value) {
      value = 0.0;
      for (std::size_t b = 0; b < nb; ++b) {
        Eigen::LLT<CMatrix> llt(from_coords(t, start[b], blocks_[b].basis.cols()));
        if (llt.info() != Eigen::Success) return false;
        const RVector d = llt.matrixL().toDenseMatrix().diagonal().real();
        if ((d.array() <= 0.0).any()) return false;
        value -= 2.0 * d.array().log().sum();
      }
      return true;
    };

    const double target = 1e-3 * std::max({opt_.gap_abs_tol, opt_.gap_rel_tol * f, 1e-15 * (1.0 + f)});
    double mu = std::max(gap, target) / nu;
    int newton_steps = 0;
    while (newton_steps < 400) {
      for (int inner = 0; inner < 60 && newton_steps < 400; ++inner, ++newton_steps) {
        RVector grad = 2.0 * mtm * theta;
        RMatrix hess = 2.0 * mtm;
        for (std::size_t b = 0; b < nb; ++b) {
          const Eigen::Index s = blocks_[b].basis.cols();
          const CMatrix winv = from_coords(theta, start[b], s).inverse();
          RVector g(herm_params(s));
          dual_coords(winv, g, 0);
          grad.segment(start[b], g.size()) -= mu * g;
          RVector unit = RVector::Zero(herm_params(s));
          for (Eigen::Index p = 0; p < herm_params(s); ++p) {
            unit.setZero();
            unit(p) = 1.0;
            const CMatrix e = from_coords(unit, 0, s);
            dual_coords(winv * e * winv, g, 0);
            hess.block(start[b], start[b] + p, g.size(), 1) += mu * g;
          }
        }
        RMatrix kkt = RMatrix::Zero(params + groups_, params + groups_);
        kkt.topLeftCorner(params, params) = hess;
        kkt.topRightCorner(params, groups_) = c.transpose();
        kkt.bottomLeftCorner(groups_, params) = c;
        RVector rhs = RVector::Zero(params + groups_);
        rhs.head(params) = -grad;
        const RVector step = kkt.partialPivLu().solve(rhs).head(params);
        if (!step.allFinite()) return false;
        const double decrement = -grad.dot(step);
        if (decrement <= 1e-3 * mu) break;
        double phi0 = 0.0;
        barrier_value(theta, phi0);
        const double obj0 = (m * theta).squaredNorm() + mu * phi0;
        double t = 1.0;
        bool moved = false;
        for (int k = 0; k < 50 && !moved; ++k, t *= 0.5) {
          const RVector trial = theta + t * step;
          double phi = 0.0;
          if (!barrier_value(trial, phi)) continue;
          if ((m * trial).squaredNorm() + mu * phi <= obj0 - 0.25 * t * decrement) {
            theta = trial;
            moved = true;
          }
        }
        if (!moved) break;
      }
      if (mu * nu <= target) break;
      mu *= 0.1;
    }

    std::vector<Atom> fresh;
    std::vector<double> sums(static_cast<std::size_t>(groups_), 0.0);
    for (std::size_t b = 0; b < nb; ++b) {
      const Eigen::Index s = blocks_[b].basis.cols();
      Eigen::SelfAdjointEigenSolver<CMatrix> solver(from_coords(theta, start[b], s));
      for (Eigen::Index j = 0; j < s; ++j) {
        const double lam = solver.eigenvalues()(j);
        if (!(lam > 0.0)) continue;
        fresh.push_back(Atom{b, solver.eigenvectors().col(j), moment_of(b, solver.eigenvectors().col(j)), lam});
        sums[static_cast<std::size_t>(blocks_[b].group)] += lam;
      }
    }
    for (double v : sums)
      if (!(v > 0.0)) return false;
    for (auto& a : fresh) a.weight /= sums[static_cast<std::size_t>(blocks_[a.block].group)];

    std::swap(atoms_, fresh);
    const RVector saved_residual = residual_;
    recompute_residual();
    const double f_new = residual_.squaredNorm();
    const double gap_new = duality_gap(linear_oracles());
    if (f_new <= f && gap_new < gap) return true;
    std::swap(atoms_, fresh);
    residual_ = saved_residual;
    return false;
  }

  const std::vector<MomentBlock>& blocks_;
  MomentProgramOptions opt_;
  Eigen::Index ambient_ = 0;
  Eigen::Index out_dim_ = 0;
  bool mapped_ = false;
  int groups_ = 0;
  std::vector<Atom> atoms_;
  RVector residual_;
};

}  // namespace

MomentProgramResult solve_moment_program(const std::vector<MomentBlock>& blocks, const MomentProgramOptions& options) {
  if (options.max_iters < 0) throw std::invalid_argument("max_iters must be nonnegative");
  MomentProgram program(blocks, options);
  return program.run();
}

MomentDistance moment_set_distance(const EigenspaceBasis& q1, const EigenspaceBasis& q2, const DistanceOptions& options) {
  if (q1.ambient_dim() != q2.ambient_dim()) throw DimensionError("subspaces must share the ambient dimension");
  std::vector<MomentBlock> blocks{{q1.columns, 1.0, 0}, {q2.columns, -1.0, 1}};
  MomentProgramOptions opt;
  opt.max_iters = options.max_iters;
  opt.zero_tol = options.gap_tol;
  opt.gap_abs_tol = options.gap_tol;
  opt.gap_rel_tol = options.relative_gap_tol;
  const MomentProgramResult r = solve_moment_program(blocks, opt);

  MomentDistance out{.distance = std::sqrt(r.objective),
                     .y = DensityMatrix(r.states[0]),
                     .z = DensityMatrix(r.states[1]),
                     .nearest_first = {},
                     .nearest_second = {},
                     .certificate_gap = r.gap,
                     .support_first = r.oracle_values[0],
                     .support_second = -r.oracle_values[1],
                     .separation_margin = r.oracle_values[0] + r.oracle_values[1],
                     .iterations = r.iterations,
                     .converged = r.converged,
                     .objective_trace = r.objective_trace};
  out.nearest_first = (q1.columns * out.y.matrix() * q1.columns.adjoint()).diagonal().real();
  out.nearest_second = (q2.columns * out.z.matrix() * q2.columns.adjoint()).diagonal().real();
  return out;
}

}  // namespace mindiag
