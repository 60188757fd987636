#pragma once

#include <optional>

#include "mindiag/hermitian.hpp"

namespace mindiag::detail {

struct PolishResult {
  RVector x;
  int iterations = 0;
};

/// Newton iterations on the local optimality conditions of
/// min ||A0 + Diag(x)|| with the top t and bottom s eigenvalues held as
/// clusters. Multipliers start from their least-squares estimate at x.
std::optional<PolishResult> newton_polish(const HermitianMatrix& a0, const RVector& x, Eigen::Index t,
                                          Eigen::Index s, int max_steps);

}  // namespace mindiag::detail
