#pragma once

#include <optional>
#include <span>

#include "mindiag/hermitian.hpp"

namespace mindiag {

/// Complex vector with unit Euclidean norm.
class UnitVector {
 public:
  /// Throws std::invalid_argument when | ||h|| - 1 | > tol; then renormalizes.
  explicit UnitVector(CVector h, double tol = 1e-10);
  /// h / ||h|| for any nonzero h.
  static UnitVector normalized(const CVector& h);

  Eigen::Index size() const { return h_.size(); }
  const CVector& values() const { return h_; }
  Complex operator[](Eigen::Index i) const { return h_(i); }
  RVector squared_moduli() const { return h_.cwiseAbs2(); }

 private:
  struct Trusted {};
  UnitVector(CVector h, Trusted) : h_(std::move(h)) {}
  CVector h_;
};

enum class RankOneCase { big_coordinate, spread, boundary };

const char* to_string(RankOneCase c);

struct RankOneSolution {
  RealDiagonal diagonal;
  double minimal_norm = 0.0;
  RankOneCase case_tag = RankOneCase::spread;
  bool unique = false;
  /// Coordinate with |h_j|^2 >= 1/2, or -1 in the spread case.
  Eigen::Index big_index = -1;
};

/// Minimizing diagonal D of h h^* and ||h h^* + D||.
RankOneSolution minimizing_diagonal(const UnitVector& h);

/// Angles with sum_j e^{i theta_j} lengths_j = 0, for nonnegative lengths
/// summing to 1 with each at most 1/2. Rotated so theta_0 = 0, values in (-pi, pi].
RVector closed_polygon_angles(std::span<const double> lengths);

/// k with |k_j| = |h_j| and <h, k> = 0; needs every |h_j|^2 <= 1/2.
UnitVector orthogonal_partner(const UnitVector& h);

struct NonuniquePair {
  HermitianMatrix plus;   // h h^* - I/2 + E_{j0}: entry j0 is +1/2
  HermitianMatrix minus;  // h h^* - I/2: entry j0 is -1/2
};

/// Two minimal matrices, differing only in the diagonal, for h with a zero
/// coordinate j0 and every |h_j|^2 <= 1/2.
NonuniquePair nonunique_diagonals(const UnitVector& h, Eigen::Index j0);

/// I/2 - h h^*, minimal when every |h_j|^2 <= 1/2 and no h_j vanishes.
HermitianMatrix generate_minimal_from_negative(const UnitVector& h);
/// Same with h truncated to its first n coordinates and renormalized.
HermitianMatrix generate_minimal_from_negative(const UnitVector& h, Eigen::Index n);

struct ColumnCriterion {
  bool zero_diagonal = false;     // T_{j0 j0} = 0
  bool full_column = false;       // T_{k j0} != 0 for k != j0
  bool dominates = false;         // ||col_j0(T)|| >= ||T^{(j0)}||
  bool orthogonal = false;        // <col_j0(T), col_k(T)> = 0 for k != j0
  double column_norm = 0.0;
  double remainder_norm = 0.0;    // ||T^{(j0)}||, row and column j0 zeroed

  bool satisfied() const { return zero_diagonal && full_column && dominates && orthogonal; }
  explicit operator bool() const { return satisfied(); }
};

/// Sufficient condition for T to be minimal with ||T|| = ||col_j0(T)||.
ColumnCriterion verify_column_criterion(const HermitianMatrix& t, Eigen::Index j0, double tol = 1e-10);

struct LemmaDiagonal {
  CVector entries;  // D_{j0 j0} = |h_j0|^2, D_jj = |h_j|^2 - conj(h_j) h_j0 (1 - |h_j|^2)
  double max_imag = 0.0;
  bool is_real = false;
};

/// Diagonal from the closed formula attached to the column criterion for
/// h h^* - D. Only meaningful when is_real; callers verify it separately.
LemmaDiagonal lemma_diagonal(const UnitVector& h, Eigen::Index j0);

/// Off-diagonal part of A0 written as scale * h h^* minus its diagonal.
struct RankOneStructure {
  double scale = 0.0;  // signed
  UnitVector h;
};

/// Finds a rank-one completion of the off-diagonal part of A0: a diagonal
/// making it scale * h h^* with the second singular value at most
/// ratio_tol times the first. Empty when none exists or the off-diagonal
/// part vanishes.
std::optional<RankOneStructure> rank_one_offdiagonal(const HermitianMatrix& a0, double ratio_tol = 1e-10);

}  // namespace mindiag
