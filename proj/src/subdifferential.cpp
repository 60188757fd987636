#include "mindiag/subdifferential.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace mindiag {

RVector SignedEigenspace::element(const DensityMatrix& r) const { return sign * moment_element(basis, r).values(); }

RVector SignedEigenspace::barycenter() const {
  return sign * basis.columns.rowwise().squaredNorm() / static_cast<double>(basis.multiplicity());
}

SignedEigenspace subdiff_lambda_max(const HermitianMatrix& a0, const RealDiagonal& x, double cluster_tol) {
  return {top_eigenspace(eigendecompose(shifted(a0, x)), cluster_tol), 1.0};
}

SignedEigenspace subdiff_lambda_min(const HermitianMatrix& a0, const RealDiagonal& x, double cluster_tol) {
  return {bottom_eigenspace(eigendecompose(shifted(a0, x)), cluster_tol), -1.0};
}

const char* to_string(ActiveSide side) {
  switch (side) {
    case ActiveSide::max_side: return "max_side";
    case ActiveSide::min_side: return "min_side";
    case ActiveSide::both_sides: return "both_sides";
  }
  return "unknown";
}

std::vector<SignedEigenspace> SubdiffDescriptor::generators() const {
  std::vector<SignedEigenspace> out;
  if (qmax) out.push_back({*qmax, 1.0});
  if (qmin) out.push_back({*qmin, -1.0});
  return out;
}

SubdiffDescriptor subdiff_norm(const EigenSystem& e, double cluster_tol) {
  SubdiffDescriptor d;
  d.lambda_max = e.lambda_max();
  d.lambda_min = e.lambda_min();
  d.norm = spectral_norm(e);
  if (d.norm <= cluster_tol) {
    std::ostringstream os;
    os << "A(x) is numerically zero (norm " << d.norm << " <= " << cluster_tol << ")";
    throw DegenerateMatrixError(os.str());
  }
  const auto clusters = cluster_eigenspaces(e, cluster_tol);
  if (extremes_tied(clusters.front().eigenvalue, clusters.back().eigenvalue, cluster_tol)) {
    d.kind = ActiveSide::both_sides;
    d.qmax = clusters.front();
    d.qmin = clusters.back();
  } else if (d.lambda_max > -d.lambda_min) {
    d.kind = ActiveSide::max_side;
    d.qmax = clusters.front();
  } else {
    d.kind = ActiveSide::min_side;
    d.qmin = clusters.back();
  }
  return d;
}

SubdiffDescriptor subdiff_norm(const HermitianMatrix& a0, const RealDiagonal& x, double cluster_tol) {
  return subdiff_norm(eigendecompose(shifted(a0, x)), cluster_tol);
}

double compressed_max(const EigenspaceBasis& q, const RVector& w) {
  if (w.size() != q.ambient_dim()) throw DimensionError("direction length must match the ambient dimension");
  const CMatrix b = q.columns.adjoint() * w.cast<Complex>().asDiagonal() * q.columns;
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(0.5 * (b + b.adjoint()), Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(solver.eigenvalues().size() - 1);
}

double directional_derivative(const HermitianMatrix& a0, const RealDiagonal& x, const RVector& w, double cluster_tol) {
  if (w.size() != a0.dim()) throw DimensionError("direction length must match the matrix dimension");
  return compressed_max(top_eigenspace(eigendecompose(shifted(a0, x)), cluster_tol), w);
}

double norm_directional_derivative(const SubdiffDescriptor& d, const RVector& w) {
  double best = -std::numeric_limits<double>::infinity();
  if (d.qmax) best = std::max(best, compressed_max(*d.qmax, w));
  if (d.qmin) best = std::max(best, compressed_max(*d.qmin, -w));
  return best;
}

double norm_directional_derivative(const HermitianMatrix& a0, const RealDiagonal& x, const RVector& w,
                                   double cluster_tol) {
  return norm_directional_derivative(subdiff_norm(a0, x, cluster_tol), w);
}

LeastNormSubgradient least_norm_subgradient(const SubdiffDescriptor& d, const MomentProgramOptions& options) {
  std::vector<MomentBlock> blocks;
  for (const auto& g : d.generators()) blocks.push_back({g.basis.columns, g.sign, 0});
  const MomentProgramResult r = solve_moment_program(blocks, options);
  return {r.residual, r.gap, r.iterations, r.converged};
}

}  // namespace mindiag
