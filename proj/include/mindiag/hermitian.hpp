#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mindiag {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Raised when operands have incompatible dimensions.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when the Hermitian eigensolver fails to converge.
class EigenSolverError : public std::runtime_error {
 public:
  EigenSolverError(const std::string& what, long iterations)
      : std::runtime_error(what), iterations_(iterations) {}
  long iterations() const { return iterations_; }

 private:
  long iterations_;
};

/// Default relative tolerance for grouping eigenvalues into eigenspaces.
inline constexpr double kDefaultClusterTol = 1e-8;

/// Dense complex self-adjoint matrix.
///
/// Construction checks |A_ij - conj(A_ji)| <= 1e-12 * max|A_ij| and then
/// replaces the input by (A + A^*)/2, so the stored matrix is exactly
/// self-adjoint with a real diagonal.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(const CMatrix& entries);
  explicit HermitianMatrix(const RMatrix& entries);

  static HermitianMatrix zero(Eigen::Index n);
  static HermitianMatrix diagonal(const RVector& d);
  /// Builds the Hermitian matrix from separate real and imaginary parts.
  static HermitianMatrix from_parts(const RMatrix& re, const RMatrix& im);

  Eigen::Index dim() const { return data_.rows(); }
  const CMatrix& matrix() const { return data_; }
  Complex operator()(Eigen::Index i, Eigen::Index j) const { return data_(i, j); }
  RVector diagonal_entries() const { return data_.diagonal().real(); }

  HermitianMatrix operator+(const HermitianMatrix& other) const;
  HermitianMatrix operator-(const HermitianMatrix& other) const;
  HermitianMatrix operator*(double scale) const;
  HermitianMatrix operator-() const { return *this * -1.0; }

 private:
  CMatrix data_;
};

/// Real vector x pairing with Diag(x).
class RealDiagonal {
 public:
  RealDiagonal() = default;
  explicit RealDiagonal(RVector values) : values_(std::move(values)) {}
  RealDiagonal(std::initializer_list<double> values);
  static RealDiagonal zero(Eigen::Index n) { return RealDiagonal(RVector::Zero(n)); }

  Eigen::Index size() const { return values_.size(); }
  const RVector& values() const { return values_; }
  double operator[](Eigen::Index i) const { return values_(i); }

 private:
  RVector values_;
};

/// Spectrum sorted in descending order with matching orthonormal columns.
struct EigenSystem {
  RVector values;
  CMatrix vectors;

  Eigen::Index dim() const { return values.size(); }
  double lambda_max() const { return values(0); }
  double lambda_min() const { return values(values.size() - 1); }
};

/// Orthonormal basis of an (approximate) eigenspace.
struct EigenspaceBasis {
  double eigenvalue = 0.0;
  CMatrix columns;

  Eigen::Index multiplicity() const { return columns.cols(); }
  Eigen::Index ambient_dim() const { return columns.rows(); }
};

/// A(x) = A0 + Diag(x).
HermitianMatrix shifted(const HermitianMatrix& a0, const RealDiagonal& x);

EigenSystem eigendecompose(const HermitianMatrix& a);
/// Eigendecomposition of a real symmetric matrix (values descending).
EigenSystem eigendecompose(const RMatrix& symmetric);

/// Greedy grouping of consecutive sorted eigenvalues: a value joins the
/// current cluster when its gap to the previous one is at most
/// cluster_tol * (1 + max|value|). Cluster eigenvalue is the mean.
std::vector<EigenspaceBasis> cluster_eigenspaces(const EigenSystem& e, double cluster_tol = kDefaultClusterTol);

/// First and last cluster of cluster_eigenspaces().
EigenspaceBasis top_eigenspace(const EigenSystem& e, double cluster_tol = kDefaultClusterTol);
EigenspaceBasis bottom_eigenspace(const EigenSystem& e, double cluster_tol = kDefaultClusterTol);

/// [[Re A, -Im A], [Im A, Re A]].
RMatrix complex_to_real_embed(const HermitianMatrix& a);

double spectral_norm(const HermitianMatrix& a);
double spectral_norm(const EigenSystem& e);

/// True when |lambda_max + lambda_min| falls inside the clustering tolerance.
bool extremes_tied(double lambda_max, double lambda_min, double cluster_tol);

}  // namespace mindiag
