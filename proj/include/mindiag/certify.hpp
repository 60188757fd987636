#pragma once

#include <optional>
#include <string>

#include "mindiag/subdifferential.hpp"

namespace mindiag {

enum class Verdict { minimal, not_minimal, inconclusive };

const char* to_string(Verdict v);

struct CertifyOptions {
  double gap_tol = 1e-9;
  int max_iters = 5000;
  double cluster_tol = kDefaultClusterTol;
  /// A minimal verdict needs |lambda_max + lambda_min| <= tie_tol * (1 + ||A||).
  /// Ties looser than this but within cluster_tol, with intersecting moment
  /// sets, are inconclusive: shifting by a multiple of I lowers the norm by
  /// half the mismatch.
  double tie_tol = 1e-11;
};

struct MinimalityCertificate {
  Verdict verdict = Verdict::inconclusive;
  ActiveSide side = ActiveSide::max_side;
  double norm = 0.0;
  double lambda_max = 0.0;
  double lambda_min = 0.0;
  /// Distance between the moment sets of the extreme eigenspaces (ties only).
  std::optional<double> gap;
  std::optional<double> duality_gap;
  int iterations = 0;
  std::optional<EigenspaceBasis> qmax;
  std::optional<EigenspaceBasis> qmin;
  /// Midpoint of the two nearest moments.
  std::optional<RVector> intersection_point;
  std::optional<CMatrix> u;  // t x t, tr U + tr V = 1
  std::optional<CMatrix> v;  // s x s
  std::optional<HermitianMatrix> witness_x;
  /// Scaled so that a step of 1e-2 along it is verified to lower the norm.
  std::optional<RVector> descent_direction;
  std::optional<double> descent_slope;
  std::string note;
};

/// Decides whether A(x) = A0 + Diag(x) is minimal among its diagonal
/// perturbations. Throws DegenerateMatrixError when A(x) is numerically zero.
MinimalityCertificate certify_minimality(const HermitianMatrix& a0, const RealDiagonal& x,
                                         const CertifyOptions& options = {});

/// |tr U + tr V - 1| <= tol and max_k |(Qmax U Qmax^*)_kk - (Qmin V Qmin^*)_kk| <= tol,
/// with U and V positive semidefinite within tol.
bool verify_certificate_b(const HermitianMatrix& a, const EigenspaceBasis& qmax, const EigenspaceBasis& qmin,
                          const CMatrix& u, const CMatrix& v, double tol);
/// Same check with the moment difference taken through a coordinate map
/// (e.g. the paired coordinates of the real embedding).
bool verify_certificate_b(const EigenspaceBasis& qmax, const EigenspaceBasis& qmin, const CMatrix& u,
                          const CMatrix& v, double tol, const RMatrix& coordinate_map);

struct WitnessCheck {
  bool diagonal_zero = false;  // max_k |X_kk| <= tol
  bool c_holds = false;        // ||A X - ||A|| |X||| <= tol (1 + ||A||)
  bool d_holds = false;        // |tr(A X) - ||A|| ||X||_1| <= tol (1 + ||A|| ||X||_1)
  double diagonal_residual = 0.0;
  double c_residual = 0.0;
  double trace_ax = 0.0;
  double norm_times_trace_norm = 0.0;

  explicit operator bool() const { return diagonal_zero && c_holds; }
};

/// Checks A X = ||A|| |X| with Diag(X) = 0, and reports tr(A X) against ||A|| ||X||_1.
/// Throws std::invalid_argument for X = 0.
WitnessCheck verify_witness_cd(const HermitianMatrix& a, const HermitianMatrix& x, double tol);

/// Which coordinates of the 2n x 2n embedding the variable x_k drives.
enum class EmbeddingPairing {
  n_plus_k,   // E_k + E_{n+k}
  n_minus_k,  // E_k + E_{n-k}, index n-k taken cyclically in 1..2n
};

/// Coordinate map P (n x 2n) with P(k, j) = 1 when x_k drives coordinate j.
RMatrix embedding_pairing_map(Eigen::Index n, EmbeddingPairing pairing);

/// Minimality decided on the real 2n x 2n embedding of A(x), with the trace
/// conditions taken against the paired coordinates. U and V are real
/// 2t x 2t and 2s x 2s blocks; the descent direction is in x coordinates.
MinimalityCertificate real_embedding_certificate(const HermitianMatrix& a0, const RealDiagonal& x,
                                                 const CertifyOptions& options = {},
                                                 EmbeddingPairing pairing = EmbeddingPairing::n_plus_k);

}  // namespace mindiag
