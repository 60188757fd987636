#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "mindiag/moment.hpp"

namespace mindiag {

/// Raised when A(x) is numerically zero and the norm subdifferential is the
/// whole dual unit ball.
class DegenerateMatrixError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The set sign * m_S with S = range(basis).
struct SignedEigenspace {
  EigenspaceBasis basis;
  double sign = 1.0;

  /// sign * diag(Q R Q^*).
  RVector element(const DensityMatrix& r) const;
  /// Element at R = I/s.
  RVector barycenter() const;
};

/// Subdifferential of x -> lambda_max(A0 + Diag(x)): m_S for the top eigenspace.
SignedEigenspace subdiff_lambda_max(const HermitianMatrix& a0, const RealDiagonal& x,
                                    double cluster_tol = kDefaultClusterTol);
/// Subdifferential of x -> lambda_min(A0 + Diag(x)): -m_S for the bottom eigenspace.
SignedEigenspace subdiff_lambda_min(const HermitianMatrix& a0, const RealDiagonal& x,
                                    double cluster_tol = kDefaultClusterTol);

enum class ActiveSide { max_side, min_side, both_sides };

const char* to_string(ActiveSide side);

struct SubdiffDescriptor {
  ActiveSide kind = ActiveSide::max_side;
  std::optional<EigenspaceBasis> qmax;  // present unless kind == min_side
  std::optional<EigenspaceBasis> qmin;  // present unless kind == max_side
  double lambda_max = 0.0;
  double lambda_min = 0.0;
  double norm = 0.0;

  /// Generators whose convex hull is the subdifferential of the norm.
  std::vector<SignedEigenspace> generators() const;
};

/// Case analysis of the norm subdifferential at A(x). Throws
/// DegenerateMatrixError when ||A(x)|| <= cluster_tol.
SubdiffDescriptor subdiff_norm(const HermitianMatrix& a0, const RealDiagonal& x,
                               double cluster_tol = kDefaultClusterTol);
SubdiffDescriptor subdiff_norm(const EigenSystem& e, double cluster_tol = kDefaultClusterTol);

/// lambda_max(Q^* Diag(w) Q).
double compressed_max(const EigenspaceBasis& q, const RVector& w);

/// One-sided derivative of lambda_max(A0 + Diag(x)) along w.
double directional_derivative(const HermitianMatrix& a0, const RealDiagonal& x, const RVector& w,
                              double cluster_tol = kDefaultClusterTol);

/// One-sided derivative of ||A0 + Diag(x)|| along w: the max of <g, w> over
/// the subdifferential.
double norm_directional_derivative(const SubdiffDescriptor& d, const RVector& w);
double norm_directional_derivative(const HermitianMatrix& a0, const RealDiagonal& x, const RVector& w,
                                   double cluster_tol = kDefaultClusterTol);

struct LeastNormSubgradient {
  RVector g;
  double gap = 0.0;  // duality gap on ||g||^2
  int iterations = 0;
  bool converged = false;
};

/// Minimum-norm element of the norm subdifferential (of co(m_max U -m_min)
/// at a tie), by conditional gradient over the generating densities.
LeastNormSubgradient least_norm_subgradient(const SubdiffDescriptor& d, const MomentProgramOptions& options = {});

}  // namespace mindiag
