#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mindiag/certify.hpp"

namespace mindiag {

enum class StepRule {
  /// BFGS on (lambda_max - lambda_min)/2 with a weak Wolfe line search,
  /// finished by Newton on the cluster optimality conditions.
  quasi_newton,
  /// t_k = (phi(x_k) - phi_best + c/(k+1)) / ||g_k||^2, falling back to
  /// 1/(k+1) while phi_best stalls.
  polyak,
  /// t_k = step_scale / (k+1) along the normalized subgradient.
  diminishing,
};

const char* to_string(StepRule rule);
StepRule step_rule_from_string(const std::string& name);

struct OptimizeParams {
  int max_iters = 2000;
  /// Certificate gap accepted as proof of minimality.
  double gap_tol = 1e-9;
  double cluster_tol = kDefaultClusterTol;
  StepRule step_rule = StepRule::quasi_newton;
  /// Polyak offset c and diminishing-step scale.
  double step_scale = 1.0;
  /// Runs stop once phi drops below eps_min * (1 + phi(x0)).
  double eps_min = 1e-13;
};

struct TracePoint {
  int iteration = 0;
  double phi = 0.0;  // best-so-far
};

struct OptimizeResult {
  RealDiagonal x_star;
  double phi_star = 0.0;
  int iterations = 0;
  MinimalityCertificate certificate;
  std::vector<TracePoint> trace;
  /// "closed_form", "zero_offdiagonal" or the step rule name.
  std::string method;
  int start_index = 0;
};

/// Throws std::invalid_argument for bad parameters or a size mismatch.
OptimizeResult minimize_sup_norm(const HermitianMatrix& a0, const RealDiagonal& x0, const OptimizeParams& params = {});

/// Runs from -diag(A0) and (starts - 1) seeded perturbations of it; keeps
/// the smallest (phi_star, start index).
OptimizeResult multi_start(const HermitianMatrix& a0, int starts, std::uint64_t seed,
                           const OptimizeParams& params = {});

/// Closed forms for a vanishing or rank-one off-diagonal part, multi_start otherwise.
OptimizeResult dispatch(const HermitianMatrix& a0, const OptimizeParams& params = {}, int starts = 1,
                        std::uint64_t seed = 0);

/// Certificate with a fallback for A(x) = 0, which is trivially minimal.
MinimalityCertificate certify_result(const HermitianMatrix& a0, const RealDiagonal& x, const OptimizeParams& params);

}  // namespace mindiag
