#include <gtest/gtest.h>

#include <random>

#include "mindiag/optimize.hpp"
#include "mindiag/rank_one.hpp"
#include "test_support.hpp"

using namespace mindiag;
using mindiag::testing::phi;
using mindiag::testing::random_hermitian;

namespace {

HermitianMatrix swap_matrix() {
  RMatrix s(2, 2);
  s << 0, 1, 1, 0;
  return HermitianMatrix(s);
}

HermitianMatrix outer(const CVector& h, double scale = 1.0) {
  return HermitianMatrix(CMatrix(scale * h * h.adjoint()));
}

bool is_minimal(const OptimizeResult& r) { return r.certificate.verdict == Verdict::minimal; }

// Smallest phi over the grid x* + step * {-m..m}^n.
double grid_minimum(const HermitianMatrix& a0, const RVector& center, double radius, double step) {
  const Eigen::Index n = center.size();
  const int m = static_cast<int>(std::lround(radius / step));
  std::vector<int> idx(static_cast<std::size_t>(n), -m);
  double best = std::numeric_limits<double>::infinity();
  for (;;) {
    RVector x = center;
    for (Eigen::Index i = 0; i < n; ++i) x(i) += step * idx[static_cast<std::size_t>(i)];
    best = std::min(best, phi(a0, x));
    Eigen::Index i = 0;
    while (i < n && idx[static_cast<std::size_t>(i)] == m) idx[static_cast<std::size_t>(i++)] = -m;
    if (i == n) break;
    ++idx[static_cast<std::size_t>(i)];
  }
  return best;
}

}  // namespace

TEST(MinimizeSupNorm, DiagonalInputCancelsExactly) {
  RVector d(2);
  d << 3, 1;
  const OptimizeResult r = minimize_sup_norm(HermitianMatrix::diagonal(d), RealDiagonal::zero(2));
  EXPECT_LE(r.phi_star, 1e-6);
  EXPECT_NEAR(r.x_star[0], -3.0, 1e-6);
  EXPECT_NEAR(r.x_star[1], -1.0, 1e-6);
}

TEST(MinimizeSupNorm, SwapMatrixFromFarStart) {
  const HermitianMatrix a = swap_matrix();
  const OptimizeResult r = minimize_sup_norm(a, RealDiagonal{5.0, -5.0});
  EXPECT_NEAR(r.phi_star, 1.0, 1e-9);
  EXPECT_TRUE(is_minimal(r)) << r.certificate.note;
  // Oracle: grid over [-6, 6]^2 has its minimum 1 at the origin.
  double grid = std::numeric_limits<double>::infinity();
  for (int i = -60; i <= 60; ++i)
    for (int j = -60; j <= 60; ++j) grid = std::min(grid, phi(a, RealDiagonal{0.1 * i, 0.1 * j}.values()));
  EXPECT_NEAR(grid, 1.0, 1e-12);
  EXPECT_GE(r.phi_star, grid - 1e-9);
}

TEST(MinimizeSupNorm, EqualSplitRankOne) {
  CVector h(2);
  h << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const OptimizeResult r = minimize_sup_norm(outer(h), RealDiagonal::zero(2));
  EXPECT_NEAR(r.phi_star, 0.5, 1e-8);
  EXPECT_NEAR(r.x_star[0], -0.5, 1e-6);
  EXPECT_NEAR(r.x_star[1], -0.5, 1e-6);
  EXPECT_TRUE(is_minimal(r));
}

TEST(MinimizeSupNorm, ResultInvariants) {
  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 20; ++rep) {
    const HermitianMatrix a = random_hermitian(2 + rep % 7, rng);
    const OptimizeResult r = minimize_sup_norm(a, RealDiagonal::zero(a.dim()));
    EXPECT_NEAR(r.phi_star, phi(a, r.x_star.values()), 1e-12);
    ASSERT_FALSE(r.trace.empty());
    for (std::size_t k = 1; k < r.trace.size(); ++k) EXPECT_LE(r.trace[k].phi, r.trace[k - 1].phi);
    EXPECT_GE(r.trace.back().phi, 0.0);
    EXPECT_TRUE(is_minimal(r)) << "rep " << rep << ": " << r.certificate.note;
    EXPECT_EQ(r.method, "quasi_newton");
  }
}

TEST(MinimizeSupNorm, InvalidParamsThrow) {
  const HermitianMatrix a = swap_matrix();
  OptimizeParams p;
  p.max_iters = 0;
  EXPECT_THROW(minimize_sup_norm(a, RealDiagonal::zero(2), p), std::invalid_argument);
  p = {};
  p.gap_tol = 0.0;
  EXPECT_THROW(minimize_sup_norm(a, RealDiagonal::zero(2), p), std::invalid_argument);
  p = {};
  p.step_scale = -1.0;
  EXPECT_THROW(minimize_sup_norm(a, RealDiagonal::zero(2), p), std::invalid_argument);
  EXPECT_THROW(minimize_sup_norm(a, RealDiagonal::zero(3)), DimensionError);
  EXPECT_THROW(multi_start(a, 0, 1), std::invalid_argument);
  EXPECT_THROW(step_rule_from_string("newton"), std::invalid_argument);
  EXPECT_EQ(step_rule_from_string("polyak"), StepRule::polyak);
}

TEST(MinimizeSupNorm, SubgradientRulesReachTheOptimum) {
  std::mt19937_64 rng(43);
  for (StepRule rule : {StepRule::polyak, StepRule::diminishing}) {
    for (int rep = 0; rep < 3; ++rep) {
      const HermitianMatrix a = random_hermitian(3, rng);
      OptimizeParams p;
      p.step_rule = rule;
      p.max_iters = 3000;
      const OptimizeResult r = minimize_sup_norm(a, RealDiagonal::zero(3), p);
      const OptimizeResult ref = minimize_sup_norm(a, RealDiagonal::zero(3));
      EXPECT_EQ(r.method, to_string(rule));
      EXPECT_GE(r.phi_star, ref.phi_star - 1e-9);
      EXPECT_LE(r.phi_star, ref.phi_star + 1e-2 * (1.0 + ref.phi_star)) << to_string(rule);
      for (std::size_t k = 1; k < r.trace.size(); ++k) EXPECT_LE(r.trace[k].phi, r.trace[k - 1].phi);
    }
  }
}

TEST(MultiStart, SingleStartIsPlainRunFromNegatedDiagonal) {
  std::mt19937_64 rng(47);
  const HermitianMatrix a = random_hermitian(5, rng);
  const OptimizeResult m = multi_start(a, 1, 123);
  const OptimizeResult r = minimize_sup_norm(a, RealDiagonal(RVector(-a.diagonal_entries())));
  EXPECT_EQ(m.phi_star, r.phi_star);
  EXPECT_EQ(m.x_star.values(), r.x_star.values());
  EXPECT_EQ(m.start_index, 0);
}

TEST(MultiStart, RankOneMatchesClosedForm) {
  CVector h(2);
  h << std::sqrt(0.8), std::sqrt(0.2);
  const OptimizeResult r = multi_start(outer(h), 4, 7);
  EXPECT_NEAR(r.phi_star, 0.4, 1e-5);
  EXPECT_NEAR(r.phi_star, minimizing_diagonal(UnitVector(h)).minimal_norm, 1e-5);
}

TEST(MultiStart, AllStartsAgreeOnConvexProblem) {
  std::mt19937_64 rng(53);
  for (int rep = 0; rep < 5; ++rep) {
    const HermitianMatrix a = random_hermitian(4, rng);
    const double first = multi_start(a, 1, 0).phi_star;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const OptimizeResult r = multi_start(a, 3, seed);
      EXPECT_NEAR(r.phi_star, first, 1e-5);
    }
  }
}

TEST(MultiStart, DeterministicForFixedSeed) {
  std::mt19937_64 rng(59);
  const HermitianMatrix a = random_hermitian(6, rng);
  const OptimizeResult r1 = multi_start(a, 4, 99);
  const OptimizeResult r2 = multi_start(a, 4, 99);
  EXPECT_EQ(r1.phi_star, r2.phi_star);
  EXPECT_EQ(r1.x_star.values(), r2.x_star.values());
  EXPECT_EQ(r1.start_index, r2.start_index);
}

TEST(Dispatch, RankOneUsesClosedForm) {
  CVector h(3);
  h << std::sqrt(0.6), std::sqrt(0.25), std::sqrt(0.15);
  const OptimizeResult r = dispatch(outer(h));
  EXPECT_EQ(r.method, "closed_form");
  EXPECT_EQ(r.iterations, 0);
  EXPECT_NEAR(r.phi_star, std::sqrt(0.6 * 0.4), 1e-12);
  EXPECT_TRUE(is_minimal(r));
}

TEST(Dispatch, GenericInputRunsTheIterativeSolver) {
  RMatrix m(3, 3);
  m << 1, 2, 0, 2, -1, 3, 0, 3, 0.5;
  const OptimizeResult r = dispatch(HermitianMatrix(m));
  EXPECT_EQ(r.method, "quasi_newton");
  EXPECT_GT(r.iterations, 0);
  EXPECT_TRUE(is_minimal(r));
}

TEST(Dispatch, ScaledRankOneScalesTheDiagonal) {
  CVector h(3);
  h << std::sqrt(0.5), Complex(0.0, std::sqrt(0.3)), std::sqrt(0.2);
  const OptimizeResult full = dispatch(outer(h));
  const OptimizeResult half = dispatch(outer(h, 0.5));
  EXPECT_EQ(half.method, "closed_form");
  EXPECT_NEAR(half.phi_star, 0.5 * full.phi_star, 1e-12);
  EXPECT_LE((half.x_star.values() - 0.5 * full.x_star.values()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Dispatch, VanishingOffDiagonal) {
  RVector d(3);
  d << 2, -1, 4;
  const OptimizeResult r = dispatch(HermitianMatrix::diagonal(d));
  EXPECT_EQ(r.method, "zero_offdiagonal");
  EXPECT_EQ(r.phi_star, 0.0);
  EXPECT_TRUE(is_minimal(r));
}

TEST(OptimizeProperties, MinimalVerdictsSurviveGridRefinement) {
  std::mt19937_64 rng(61);
  for (int rep = 0; rep < 6; ++rep) {
    const Eigen::Index n = rep < 4 ? 3 : 4;
    const HermitianMatrix a = random_hermitian(n, rng, rep % 2 == 0);
    const OptimizeResult r = multi_start(a, 1, 0);
    ASSERT_TRUE(is_minimal(r));
    EXPECT_GE(grid_minimum(a, r.x_star.values(), 0.1, 0.01), r.phi_star - 1e-6) << "rep " << rep;
  }
}

TEST(OptimizeProperties, ScaleEquivariance) {
  std::mt19937_64 rng(67);
  for (int rep = 0; rep < 10; ++rep) {
    const HermitianMatrix a = random_hermitian(2 + rep % 5, rng);
    const double c = 0.25 + 0.5 * rep;
    const OptimizeResult r = multi_start(a, 1, 0);
    const OptimizeResult rc = multi_start(HermitianMatrix(CMatrix(c * a.matrix())), 1, 0);
    EXPECT_NEAR(rc.phi_star, c * r.phi_star, 1e-6 * (1.0 + c));
    EXPECT_LE((rc.x_star.values() - c * r.x_star.values()).cwiseAbs().maxCoeff(), 1e-6 * (1.0 + c));
  }
}

TEST(OptimizeProperties, ShiftEquivariance) {
  std::mt19937_64 rng(71);
  std::normal_distribution<double> normal(0.0, 2.0);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::Index n = 2 + rep % 5;
    const HermitianMatrix a = random_hermitian(n, rng);
    RVector d(n);
    for (Eigen::Index i = 0; i < n; ++i) d(i) = normal(rng);
    const OptimizeResult r = multi_start(a, 1, 0);
    const OptimizeResult rs = multi_start(shifted(a, RealDiagonal(d)), 1, 0);
    EXPECT_NEAR(rs.phi_star, r.phi_star, 1e-6);
    EXPECT_LE((rs.x_star.values() - (r.x_star.values() - d)).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(OptimizeProperties, LargerInstancesCertify) {
  std::mt19937_64 rng(73);
  for (Eigen::Index n : {12, 16, 24, 32}) {
    const HermitianMatrix a = random_hermitian(n, rng);
    const OptimizeResult r = multi_start(a, 1, 0);
    EXPECT_TRUE(is_minimal(r)) << "n=" << n << " gap=" << r.certificate.gap.value_or(-1.0);
  }
}
