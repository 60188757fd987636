#include "newton_polish.hpp"

#include <cmath>
#include <limits>

namespace mindiag::detail {

namespace {

// Real coordinates of a Hermitian k x k matrix: k diagonal entries, then
// (Re, Im) of each strictly upper entry.
Eigen::Index herm_params(Eigen::Index k) { return k * k; }

CMatrix herm_basis(Eigen::Index k, Eigen::Index p) {
  CMatrix b = CMatrix::Zero(k, k);
  if (p < k) {
    b(p, p) = 1.0;
    return b;
  }
  p -= k;
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = i + 1; j < k; ++j) {
      if (p == 0) {
        b(i, j) = b(j, i) = 1.0;
        return b;
      }
      if (p == 1) {
        b(i, j) = Complex(0.0, 1.0);
        b(j, i) = Complex(0.0, -1.0);
        return b;
      }
      p -= 2;
    }
  return b;
}

CMatrix herm_from(const RVector& z, Eigen::Index k) {
  CMatrix m = CMatrix::Zero(k, k);
  for (Eigen::Index p = 0; p < herm_params(k); ++p) m += z(p) * herm_basis(k, p);
  return m;
}

// Sum over eigenvectors m outside [first, first + k) of q_m q_m^* / (mu - lambda_m).
CMatrix resolvent(const EigenSystem& e, Eigen::Index first, Eigen::Index k, double mu) {
  const Eigen::Index n = e.dim();
  CMatrix g = CMatrix::Zero(n, n);
  for (Eigen::Index m = 0; m < n; ++m) {
    if (m >= first && m < first + k) continue;
    g += e.vectors.col(m) * e.vectors.col(m).adjoint() / (mu - e.values(m));
  }
  return g;
}

struct Cluster {
  CMatrix q;
  RVector values;
  double mean = 0.0;
  CMatrix g;  // resolvent of the complement
};

// Rows: feasibility of one cluster. Writes into j / rhs starting at row r.
void feasibility_rows(const Cluster& c, double w_sign, Eigen::Index delta_col, Eigen::Index w_col, RMatrix& jac,
                      RVector& rhs, Eigen::Index& r) {
  const Eigen::Index k = c.q.cols(), n = c.q.rows();
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index j = 0; j < n; ++j) jac(r, delta_col + j) = std::norm(c.q(j, a));
    jac(r, w_col) = -w_sign;
    rhs(r) = -c.values(a);
    ++r;
  }
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = a + 1; b < k; ++b) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const Complex v = std::conj(c.q(j, a)) * c.q(j, b);
        jac(r, delta_col + j) = v.real();
        jac(r + 1, delta_col + j) = v.imag();
      }
      r += 2;
    }
}

}  // namespace

std::optional<PolishResult> newton_polish(const HermitianMatrix& a0, const RVector& x0, Eigen::Index t,
                                          Eigen::Index s, int max_steps) {
  const Eigen::Index n = a0.dim();
  if (t < 1 || s < 1 || t + s > n) return std::nullopt;
  const Eigen::Index pu = herm_params(t), pv = herm_params(s);
  const Eigen::Index cols = n + 1 + pu + pv;
  const Eigen::Index rows = pu + pv + n + 1;
  const Eigen::Index w_col = n, u_col = n + 1, v_col = n + 1 + pu;

  RVector x = x0;
  // Multipliers in ambient coordinates, Q U Q^* and Q V Q^*: the basis
  // inside a nearly degenerate cluster rotates freely between steps.
  CMatrix xt, xb;
  {
    // Least-squares multipliers at x0: diag(Qt U Qt^*) = diag(Qb V Qb^*), tr U + tr V = 1.
    const EigenSystem e = eigendecompose(shifted(a0, RealDiagonal(x)));
    RMatrix m = RMatrix::Zero(n + 1, pu + pv);
    for (Eigen::Index p = 0; p < pu; ++p)
      m.block(0, p, n, 1) = (e.vectors.leftCols(t) * herm_basis(t, p) * e.vectors.leftCols(t).adjoint()).diagonal().real();
    for (Eigen::Index p = 0; p < pv; ++p)
      m.block(0, pu + p, n, 1) =
          -(e.vectors.rightCols(s) * herm_basis(s, p) * e.vectors.rightCols(s).adjoint()).diagonal().real();
    for (Eigen::Index p = 0; p < t; ++p) m(n, p) = 1.0;
    for (Eigen::Index p = 0; p < s; ++p) m(n, pu + p) = 1.0;
    RVector b = RVector::Zero(n + 1);
    b(n) = 1.0;
    const RVector z = m.completeOrthogonalDecomposition().solve(b);
    if (!z.allFinite()) return std::nullopt;
    xt = e.vectors.leftCols(t) * herm_from(z.head(pu), t) * e.vectors.leftCols(t).adjoint();
    xb = e.vectors.rightCols(s) * herm_from(z.tail(pv), s) * e.vectors.rightCols(s).adjoint();
  }
  PolishResult out;
  double last = std::numeric_limits<double>::infinity();
  int stalls = 0;
  for (int step = 0; step < max_steps; ++step) {
    const EigenSystem e = eigendecompose(shifted(a0, RealDiagonal(x)));
    if (e.values(t - 1) <= e.values(n - s)) break;  // clusters overlap
    Cluster top{e.vectors.leftCols(t), e.values.head(t), e.values.head(t).mean(), {}};
    Cluster bottom{e.vectors.rightCols(s), e.values.tail(s), e.values.tail(s).mean(), {}};
    top.g = resolvent(e, 0, t, top.mean);
    bottom.g = resolvent(e, n - s, s, bottom.mean);

    RMatrix jac = RMatrix::Zero(rows, cols);
    RVector rhs = RVector::Zero(rows);
    Eigen::Index r = 0;
    feasibility_rows(top, 1.0, 0, w_col, jac, rhs, r);
    feasibility_rows(bottom, -1.0, 0, w_col, jac, rhs, r);

    // Stationarity: diag(Qt U Qt^*) - diag(Qb V Qb^*) + H delta = 0.
    const CMatrix u = top.q.adjoint() * xt * top.q;
    const CMatrix v = bottom.q.adjoint() * xb * bottom.q;
    xt = top.q * u * top.q.adjoint();
    xb = bottom.q * v * bottom.q.adjoint();
    const RMatrix hess = 2.0 * (xt.cwiseProduct(top.g.transpose()) - xb.cwiseProduct(bottom.g.transpose())).real();
    jac.block(r, 0, n, n) = hess;
    for (Eigen::Index p = 0; p < pu; ++p)
      jac.block(r, u_col + p, n, 1) = (top.q * herm_basis(t, p) * top.q.adjoint()).diagonal().real();
    for (Eigen::Index p = 0; p < pv; ++p)
      jac.block(r, v_col + p, n, 1) = -(bottom.q * herm_basis(s, p) * bottom.q.adjoint()).diagonal().real();
    r += n;
    for (Eigen::Index p = 0; p < t; ++p) jac(r, u_col + p) = 1.0;
    for (Eigen::Index p = 0; p < s; ++p) jac(r, v_col + p) = 1.0;
    rhs(r) = 1.0;

    const RVector z = jac.completeOrthogonalDecomposition().solve(rhs);
    if (!z.allFinite()) break;
    const RVector delta = z.head(n);
    const CMatrix u_new = herm_from(z.segment(u_col, pu), t);
    const CMatrix v_new = herm_from(z.segment(v_col, pv), s);

    // Damped step: the spread (lambda_max - lambda_min)/2 may not grow
    // beyond rounding.
    const double spread = 0.5 * (e.lambda_max() - e.lambda_min());
    const double slack = 1e-14 * (1.0 + spread);
    double step_len = 1.0;
    bool moved = false;
    for (int halving = 0; halving < 20; ++halving, step_len *= 0.5) {
      const EigenSystem trial = eigendecompose(shifted(a0, RealDiagonal(RVector(x + step_len * delta))));
      if (0.5 * (trial.lambda_max() - trial.lambda_min()) <= spread + slack) {
        moved = true;
        break;
      }
    }
    if (!moved) break;
    x += step_len * delta;
    xt = top.q * (u + step_len * (u_new - u)) * top.q.adjoint();
    xb = bottom.q * (v + step_len * (v_new - v)) * bottom.q.adjoint();
    out.iterations = step + 1;
    const double size = step_len * delta.norm();
    if (size <= 1e-13 * (1.0 + x.norm())) break;
    // Converging steps shrink fast; give up after repeated stalls.
    stalls = size < 0.5 * last ? 0 : stalls + 1;
    if (stalls >= 4) break;
    last = size;
  }
  if (out.iterations == 0) return std::nullopt;
  out.x = x;
  return out;
}

}  // namespace mindiag::detail
