#pragma once

#include <cmath>
#include <random>

#include "mindiag/hermitian.hpp"

namespace mindiag::testing {

inline HermitianMatrix random_hermitian(Eigen::Index n, std::mt19937_64& rng, bool complex_entries = true) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = Complex(normal(rng), complex_entries ? normal(rng) : 0.0);
  return HermitianMatrix(CMatrix(0.5 * (m + m.adjoint())));
}

inline CVector random_unit_vector(Eigen::Index n, std::mt19937_64& rng, bool complex_entries = true) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(normal(rng), complex_entries ? normal(rng) : 0.0);
  return v / v.norm();
}

/// Random unit vector with every |h_j|^2 <= 1/2 and h_j != 0.
inline CVector random_spread_unit_vector(Eigen::Index n, std::mt19937_64& rng, bool complex_entries = true) {
  if (n == 2) {
    // Only equal moduli are feasible in two dimensions.
    std::uniform_real_distribution<double> angle(-M_PI, M_PI);
    CVector h(2);
    h << 1.0, complex_entries ? std::polar(1.0, angle(rng)) : Complex(angle(rng) < 0 ? -1.0 : 1.0);
    return h / std::sqrt(2.0);
  }
  for (;;) {
    CVector h = random_unit_vector(n, rng, complex_entries);
    if (h.cwiseAbs2().maxCoeff() <= 0.5 && h.cwiseAbs().minCoeff() > 1e-3) return h;
  }
}

inline double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

/// Brute-force phi(x) = ||A0 + Diag(x)||.
inline double phi(const HermitianMatrix& a0, const RVector& x) {
  return spectral_norm(shifted(a0, RealDiagonal(x)));
}

}  // namespace mindiag::testing
