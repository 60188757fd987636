#include "mindiag/hermitian.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mindiag {

namespace {

// Eigen's tridiagonal QR caps the sweep count at this multiple of n.
constexpr long kEigenMaxIterationsPerRow = 30;

CMatrix checked_symmetrize(const CMatrix& m) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << "Hermitian matrix must be square, got " << m.rows() << "x" << m.cols();
    throw DimensionError(os.str());
  }
  if (m.rows() == 0) throw DimensionError("Hermitian matrix must have positive dimension");
  const double scale = m.cwiseAbs().maxCoeff();
  const double defect = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (!std::isfinite(scale)) throw std::invalid_argument("matrix has non-finite entries");
  if (defect > 1e-12 * scale) {
    std::ostringstream os;
    os << "matrix is not Hermitian: max |A_ij - conj(A_ji)| = " << defect;
    throw std::invalid_argument(os.str());
  }
  CMatrix sym = 0.5 * (m + m.adjoint());
  sym.diagonal() = sym.diagonal().real().cast<Complex>();
  return sym;
}

template <class Matrix>
EigenSystem solve_descending(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success) {
    const long iters = kEigenMaxIterationsPerRow * static_cast<long>(m.rows());
    std::ostringstream os;
    os << "Hermitian eigensolver did not converge within " << iters << " iterations";
    throw EigenSolverError(os.str(), iters);
  }
  const Eigen::Index n = m.rows();
  EigenSystem e;
  e.values = solver.eigenvalues().reverse();
  e.vectors.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) e.vectors.col(j) = solver.eigenvectors().col(n - 1 - j).template cast<Complex>();
  return e;
}

}  // namespace

HermitianMatrix::HermitianMatrix(const CMatrix& entries) : data_(checked_symmetrize(entries)) {}

HermitianMatrix::HermitianMatrix(const RMatrix& entries) : data_(checked_symmetrize(entries.cast<Complex>())) {}

HermitianMatrix HermitianMatrix::zero(Eigen::Index n) { return HermitianMatrix(CMatrix(CMatrix::Zero(n, n))); }

HermitianMatrix HermitianMatrix::diagonal(const RVector& d) {
  return HermitianMatrix(CMatrix(d.cast<Complex>().asDiagonal()));
}

HermitianMatrix HermitianMatrix::from_parts(const RMatrix& re, const RMatrix& im) {
  if (re.rows() != im.rows() || re.cols() != im.cols()) throw DimensionError("real and imaginary parts differ in shape");
  CMatrix m(re.rows(), re.cols());
  m.real() = re;
  m.imag() = im;
  return HermitianMatrix(m);
}

HermitianMatrix HermitianMatrix::operator+(const HermitianMatrix& other) const {
  if (dim() != other.dim()) throw DimensionError("dimension mismatch in Hermitian sum");
  return HermitianMatrix(CMatrix(data_ + other.data_));
}

HermitianMatrix HermitianMatrix::operator-(const HermitianMatrix& other) const {
  if (dim() != other.dim()) throw DimensionError("dimension mismatch in Hermitian difference");
  return HermitianMatrix(CMatrix(data_ - other.data_));
}

HermitianMatrix HermitianMatrix::operator*(double scale) const { return HermitianMatrix(CMatrix(scale * data_)); }

RealDiagonal::RealDiagonal(std::initializer_list<double> values) : values_(static_cast<Eigen::Index>(values.size())) {
  Eigen::Index i = 0;
  for (double v : values) values_(i++) = v;
}

HermitianMatrix shifted(const HermitianMatrix& a0, const RealDiagonal& x) {
  if (a0.dim() != x.size()) {
    std::ostringstream os;
    os << "diagonal of length " << x.size() << " does not match matrix dimension " << a0.dim();
    throw DimensionError(os.str());
  }
  CMatrix m = a0.matrix();
  m.diagonal() += x.values().cast<Complex>();
  return HermitianMatrix(m);
}

EigenSystem eigendecompose(const HermitianMatrix& a) { return solve_descending(a.matrix()); }

EigenSystem eigendecompose(const RMatrix& symmetric) {
  if (symmetric.rows() != symmetric.cols()) throw DimensionError("symmetric matrix must be square");
  return solve_descending(RMatrix(0.5 * (symmetric + symmetric.transpose())));
}

std::vector<EigenspaceBasis> cluster_eigenspaces(const EigenSystem& e, double cluster_tol) {
  if (!(cluster_tol > 0.0)) throw std::invalid_argument("cluster_tol must be positive");
  std::vector<EigenspaceBasis> clusters;
  const Eigen::Index n = e.dim();
  if (n == 0) return clusters;
  const double threshold = cluster_tol * (1.0 + e.values.cwiseAbs().maxCoeff());
  Eigen::Index start = 0;
  for (Eigen::Index i = 1; i <= n; ++i) {
    if (i < n && e.values(i - 1) - e.values(i) <= threshold) continue;
    EigenspaceBasis b;
    b.eigenvalue = e.values.segment(start, i - start).mean();
    b.columns = e.vectors.middleCols(start, i - start);
    clusters.push_back(std::move(b));
    start = i;
  }
  return clusters;
}

EigenspaceBasis top_eigenspace(const EigenSystem& e, double cluster_tol) {
  return cluster_eigenspaces(e, cluster_tol).front();
}

EigenspaceBasis bottom_eigenspace(const EigenSystem& e, double cluster_tol) {
  return cluster_eigenspaces(e, cluster_tol).back();
}

RMatrix complex_to_real_embed(const HermitianMatrix& a) {
  const Eigen::Index n = a.dim();
  RMatrix out(2 * n, 2 * n);
  const RMatrix re = a.matrix().real();
  const RMatrix im = a.matrix().imag();
  out.topLeftCorner(n, n) = re;
  out.topRightCorner(n, n) = -im;
  out.bottomLeftCorner(n, n) = im;
  out.bottomRightCorner(n, n) = re;
  return out;
}

double spectral_norm(const EigenSystem& e) { return std::max(std::abs(e.lambda_max()), std::abs(e.lambda_min())); }

double spectral_norm(const HermitianMatrix& a) { return spectral_norm(eigendecompose(a)); }

bool extremes_tied(double lambda_max, double lambda_min, double cluster_tol) {
  const double scale = 1.0 + std::max(std::abs(lambda_max), std::abs(lambda_min));
  return std::abs(lambda_max + lambda_min) <= cluster_tol * scale;
}

}  // namespace mindiag
