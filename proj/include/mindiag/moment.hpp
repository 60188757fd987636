#pragma once

#include <span>
#include <vector>

#include "mindiag/hermitian.hpp"

namespace mindiag {

/// Positive semidefinite, unit-trace self-adjoint matrix.
class DensityMatrix {
 public:
  /// Validates min eigenvalue >= -tol and |trace - 1| <= tol, then symmetrizes.
  explicit DensityMatrix(const CMatrix& entries, double tol = 1e-10);

  static DensityMatrix maximally_mixed(Eigen::Index dim);
  /// v v^* / |v|^2.
  static DensityMatrix pure(const CVector& v);

  Eigen::Index dim() const { return data_.rows(); }
  const CMatrix& matrix() const { return data_; }

 private:
  CMatrix data_;
};

/// Nonnegative real vector with unit sum; an element of a moment set m_S.
class MomentVector {
 public:
  explicit MomentVector(RVector v);

  Eigen::Index size() const { return v_.size(); }
  const RVector& values() const { return v_; }
  double operator[](Eigen::Index i) const { return v_(i); }

 private:
  RVector v_;
};

/// diag(Q R Q^*): the moment of S = range(Q) generated by the density R.
MomentVector moment_element(const EigenspaceBasis& q, const DensityMatrix& r);

/// Component j is tr(P_S E_j P_S rho) with P_S = Q Q^* and E_j = e_j e_j^*.
/// Indices are zero-based positions in the ambient space.
RVector jnr_point(const EigenspaceBasis& s, const DensityMatrix& rho, std::span<const Eigen::Index> indices);

struct DistanceOptions {
  int max_iters = 5000;
  double gap_tol = 1e-9;
  /// Relative duality-gap accuracy accepted for disjoint sets.
  double relative_gap_tol = 1e-4;
};

struct MomentDistance {
  double distance = 0.0;
  DensityMatrix y;  // over the first subspace
  DensityMatrix z;  // over the second subspace
  RVector nearest_first;   // diag(Q1 Y Q1^*)
  RVector nearest_second;  // diag(Q2 Z Q2^*)
  double certificate_gap = 0.0;  // Frank-Wolfe duality gap on the squared distance
  /// With r = nearest_first - nearest_second: min over m_S1 of <r, g> and
  /// max over m_S2 of <r, g>. A positive margin (their difference) proves
  /// the sets are disjoint.
  double support_first = 0.0;
  double support_second = 0.0;
  double separation_margin = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // squared distance per iteration
};

/// Euclidean distance between m_{S1} and m_{S2}, minimized over pairs of
/// density matrices by conditional gradient with exact line search.
MomentDistance moment_set_distance(const EigenspaceBasis& q1, const EigenspaceBasis& q2,
                                   const DistanceOptions& options = {});

// ---------------------------------------------------------------------------
// Generic quadratic program over products of spectraplexes.
//
//   minimize  || sum_b sign_b * P diag(Q_b W_b Q_b^*) ||^2
//   s.t.      W_b >= 0,  sum_{b in group g} tr(W_b) = 1  for every group g.
//
// P is the coordinate map (identity when empty). The moment-set distance,
// the least-norm element of co(m_max U -m_min), and the paired-coordinate
// check of the real embedding are all instances.

struct MomentBlock {
  CMatrix basis;
  double sign = 1.0;
  int group = 0;
};

struct MomentProgramOptions {
  int max_iters = 5000;
  /// Stop once the residual norm is at most zero_tol.
  double zero_tol = 1e-9;
  /// Stop once gap <= max(gap_abs_tol, gap_rel_tol * f) while f - gap/2 > 0,
  /// i.e. the residual direction strictly separates the groups' sets.
  double gap_abs_tol = 1e-9;
  double gap_rel_tol = 0.0;
  RMatrix coordinate_map;
  /// Run a Gauss-Newton refinement of the factored states when the sets
  /// appear to intersect but the residual is above zero_tol.
  bool polish = true;
};

struct MomentProgramResult {
  std::vector<CMatrix> states;  // W_b, one per block
  RVector residual;
  double objective = 0.0;  // ||residual||^2
  double gap = 0.0;
  /// Per group: min over the group's set of <residual, signed moment>.
  /// Their sum equals f - gap/2.
  std::vector<double> oracle_values;
  int iterations = 0;
  bool converged = false;
  bool zero_reached = false;
  std::vector<double> objective_trace;
};

MomentProgramResult solve_moment_program(const std::vector<MomentBlock>& blocks, const MomentProgramOptions& options);

}  // namespace mindiag
