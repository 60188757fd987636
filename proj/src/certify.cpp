#include "mindiag/certify.hpp"

#include <cmath>
#include <sstream>

namespace mindiag {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::minimal: return "minimal";
    case Verdict::not_minimal: return "not_minimal";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

namespace {

constexpr double kSlopeTol = 1e-10;

// A Hermitian matrix in ambient coordinates whose diagonal is driven by
// x through the coordinate map: shift = Diag(P^T x).
struct Problem {
  HermitianMatrix a;
  std::optional<RMatrix> map;

  RVector lift(const RVector& w) const { return map ? RVector(map->transpose() * w) : w; }
  RVector project(const RVector& g) const { return map ? RVector(*map * g) : g; }
  Eigen::Index out_dim() const { return map ? map->rows() : a.dim(); }

  double phi_along(const RVector& w, double t) const { return spectral_norm(shifted(a, RealDiagonal(lift(t * w)))); }
};

// Backtracks along w from a unit step. On success w is rescaled so that a
// step of 1e-2 lies inside the verified decrease interval (phi is convex
// along the ray).
bool verify_descent(const Problem& p, double phi0, RVector& w) {
  w /= w.norm();
  double t = 1.0;
  for (int k = 0; k < 80; ++k, t *= 0.5) {
    if (p.phi_along(w, t) < phi0 - 1e-13 * (1.0 + phi0)) {
      if (t < 1e-2) w *= t / 1e-2;
      return true;
    }
  }
  return false;
}

void accept_descent(MinimalityCertificate& cert, const SubdiffDescriptor& d, const Problem& p, RVector w) {
  if (verify_descent(p, d.norm, w)) {
    const double slope = norm_directional_derivative(d, p.lift(w));
    cert.descent_slope = slope;
    if (slope < -kSlopeTol) {
      cert.verdict = Verdict::not_minimal;
      cert.descent_direction = std::move(w);
      return;
    }
  }
  cert.verdict = Verdict::inconclusive;
  cert.note = "descent direction could not be verified";
}

bool check_certificate_b(const EigenspaceBasis& qmax, const EigenspaceBasis& qmin, const CMatrix& u, const CMatrix& v,
                         double tol, const std::optional<RMatrix>& map) {
  if (u.rows() != qmax.multiplicity() || u.cols() != qmax.multiplicity())
    throw DimensionError("U must be t x t with t the top multiplicity");
  if (v.rows() != qmin.multiplicity() || v.cols() != qmin.multiplicity())
    throw DimensionError("V must be s x s with s the bottom multiplicity");
  if (qmax.ambient_dim() != qmin.ambient_dim()) throw DimensionError("eigenspaces must share the ambient dimension");
  auto min_eig = [](const CMatrix& m) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    return solver.eigenvalues()(0);
  };
  if (min_eig(u) < -tol || min_eig(v) < -tol) return false;
  if (std::abs((u.trace() + v.trace()).real() - 1.0) > tol) return false;
  RVector diff = (qmax.columns * u * qmax.columns.adjoint()).diagonal().real() -
                 (qmin.columns * v * qmin.columns.adjoint()).diagonal().real();
  if (map) diff = *map * diff;
  return diff.cwiseAbs().maxCoeff() <= tol;
}

MinimalityCertificate certify_problem(const Problem& p, const CertifyOptions& options) {
  if (options.gap_tol <= 0.0) throw std::invalid_argument("gap_tol must be positive");
  if (options.max_iters < 0) throw std::invalid_argument("max_iters must be nonnegative");
  const EigenSystem e = eigendecompose(p.a);
  const SubdiffDescriptor d = subdiff_norm(e, options.cluster_tol);
  MinimalityCertificate cert;
  cert.side = d.kind;
  cert.norm = d.norm;
  cert.lambda_max = d.lambda_max;
  cert.lambda_min = d.lambda_min;
  cert.qmax = d.qmax;
  cert.qmin = d.qmin;
  const Eigen::Index out = p.out_dim();

  if (d.kind != ActiveSide::both_sides) {
    // One extreme dominates: -g for the barycentric subgradient g, or a
    // shift by the identity when that slope is too flat to certify.
    const SignedEigenspace side = d.generators().front();
    RVector w = -p.project(side.barycenter());
    if (norm_directional_derivative(d, p.lift(w)) >= -kSlopeTol) w = -side.sign * RVector::Ones(out);
    accept_descent(cert, d, p, std::move(w));
    return cert;
  }

  MomentProgramOptions mo;
  mo.max_iters = options.max_iters;
  mo.zero_tol = options.gap_tol;
  mo.gap_abs_tol = options.gap_tol;
  mo.gap_rel_tol = DistanceOptions{}.relative_gap_tol;
  if (p.map) mo.coordinate_map = *p.map;
  const std::vector<MomentBlock> blocks{{d.qmax->columns, 1.0, 0}, {d.qmin->columns, -1.0, 1}};
  const MomentProgramResult r = solve_moment_program(blocks, mo);
  const double distance = std::sqrt(r.objective);
  cert.gap = distance;
  cert.duality_gap = r.gap;
  cert.iterations = r.iterations;

  if (distance <= options.gap_tol) {
    const double mismatch = std::abs(e.values(0) + e.values(e.dim() - 1));
    if (mismatch > options.tie_tol * (1.0 + d.norm)) {
      std::ostringstream os;
      os << "moment sets intersect but lambda_max + lambda_min = " << e.values(0) + e.values(e.dim() - 1)
         << "; a shift by the identity lowers the norm by half of that";
      cert.verdict = Verdict::inconclusive;
      cert.note = os.str();
      return cert;
    }
    cert.verdict = Verdict::minimal;
    cert.u = CMatrix(0.5 * r.states[0]);
    cert.v = CMatrix(0.5 * r.states[1]);
    const RVector p_top = (d.qmax->columns * r.states[0] * d.qmax->columns.adjoint()).diagonal().real();
    const RVector p_bottom = (d.qmin->columns * r.states[1] * d.qmin->columns.adjoint()).diagonal().real();
    cert.intersection_point = RVector(0.5 * (p.project(p_top) + p.project(p_bottom)));
    if (!p.map) {
      const CMatrix x = d.qmax->columns * *cert.u * d.qmax->columns.adjoint() -
                        d.qmin->columns * *cert.v * d.qmin->columns.adjoint();
      cert.witness_x = HermitianMatrix(CMatrix(0.5 * (x + x.adjoint())));
    }
    return cert;
  }

  const double support_first = r.oracle_values[0];
  const double support_second = -r.oracle_values[1];
  if (r.converged && support_first > support_second) {
    // The residual r = p - q separates the sets: <r, g> >= support_first on
    // m_max and <r, g> <= support_second on m_min. Along -r + c 1 both
    // extremes then move by -(support_first - support_second) / 2.
    const double c = 0.5 * (support_first + support_second);
    accept_descent(cert, d, p, RVector(-r.residual + c * RVector::Ones(out)));
    return cert;
  }
  cert.verdict = Verdict::inconclusive;
  cert.note = "moment-set distance did not converge within max_iters";
  return cert;
}

}  // namespace

MinimalityCertificate certify_minimality(const HermitianMatrix& a0, const RealDiagonal& x,
                                         const CertifyOptions& options) {
  return certify_problem(Problem{shifted(a0, x), std::nullopt}, options);
}

bool verify_certificate_b(const HermitianMatrix& a, const EigenspaceBasis& qmax, const EigenspaceBasis& qmin,
                          const CMatrix& u, const CMatrix& v, double tol) {
  if (qmax.ambient_dim() != a.dim()) throw DimensionError("eigenspace basis does not match the matrix dimension");
  return check_certificate_b(qmax, qmin, u, v, tol, std::nullopt);
}

bool verify_certificate_b(const EigenspaceBasis& qmax, const EigenspaceBasis& qmin, const CMatrix& u,
                          const CMatrix& v, double tol, const RMatrix& coordinate_map) {
  if (coordinate_map.cols() != qmax.ambient_dim()) throw DimensionError("coordinate map does not match the eigenspaces");
  return check_certificate_b(qmax, qmin, u, v, tol, coordinate_map);
}

WitnessCheck verify_witness_cd(const HermitianMatrix& a, const HermitianMatrix& x, double tol) {
  if (a.dim() != x.dim()) throw DimensionError("witness must match the matrix dimension");
  if (x.matrix().cwiseAbs().maxCoeff() == 0.0) throw std::invalid_argument("witness X must be nonzero");
  const double norm_a = spectral_norm(a);
  const EigenSystem ex = eigendecompose(x);
  const CMatrix modulus = ex.vectors * ex.values.cwiseAbs().cast<Complex>().asDiagonal() * ex.vectors.adjoint();
  const double trace_norm = ex.values.cwiseAbs().sum();

  WitnessCheck w;
  w.diagonal_residual = x.matrix().diagonal().cwiseAbs().maxCoeff();
  w.diagonal_zero = w.diagonal_residual <= tol;
  const CMatrix defect = a.matrix() * x.matrix() - norm_a * modulus;
  w.c_residual = Eigen::JacobiSVD<CMatrix>(defect).singularValues()(0);
  w.c_holds = w.c_residual <= tol * (1.0 + norm_a);
  w.trace_ax = (a.matrix() * x.matrix()).trace().real();
  w.norm_times_trace_norm = norm_a * trace_norm;
  w.d_holds = std::abs(w.trace_ax - w.norm_times_trace_norm) <= tol * (1.0 + w.norm_times_trace_norm);
  return w;
}

RMatrix embedding_pairing_map(Eigen::Index n, EmbeddingPairing pairing) {
  if (n <= 0) throw DimensionError("dimension must be positive");
  RMatrix p = RMatrix::Zero(n, 2 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    p(k, k) += 1.0;
    if (pairing == EmbeddingPairing::n_plus_k) {
      p(k, n + k) += 1.0;
    } else {
      // One-based partner n - k, wrapped into 1..2n.
      Eigen::Index partner = n - (k + 1);
      if (partner <= 0) partner += 2 * n;
      p(k, partner - 1) += 1.0;
    }
  }
  return p;
}

MinimalityCertificate real_embedding_certificate(const HermitianMatrix& a0, const RealDiagonal& x,
                                                 const CertifyOptions& options, EmbeddingPairing pairing) {
  const HermitianMatrix embedded(complex_to_real_embed(shifted(a0, x)));
  return certify_problem(Problem{embedded, embedding_pairing_map(a0.dim(), pairing)}, options);
}

}  // namespace mindiag
