#include "mindiag/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "mindiag/rank_one.hpp"
#include "newton_polish.hpp"

namespace mindiag {

namespace {

struct Point {
  RVector x;
  EigenSystem e;
  double phi() const { return std::max(e.lambda_max(), -e.lambda_min()); }
  double spread() const { return 0.5 * (e.lambda_max() - e.lambda_min()); }
};

Point evaluate(const HermitianMatrix& a0, RVector x) {
  Point p{std::move(x), {}};
  p.e = eigendecompose(shifted(a0, RealDiagonal(p.x)));
  return p;
}

// Shift by a multiple of 1 so that lambda_max = -lambda_min. Exact on the
// spectrum; the eigenvectors do not change.
void center(Point& p) {
  const double c = 0.5 * (p.e.lambda_max() + p.e.lambda_min());
  p.x.array() -= c;
  p.e.values.array() -= c;
}

// Columns of the eigenvectors whose eigenvalues lie within eps of an end.
EigenspaceBasis near_top(const EigenSystem& e, double eps) {
  Eigen::Index k = 1;
  while (k < e.dim() && e.values(k) >= e.lambda_max() - eps) ++k;
  return {e.lambda_max(), e.vectors.leftCols(k)};
}

EigenspaceBasis near_bottom(const EigenSystem& e, double eps) {
  Eigen::Index k = 1;
  while (k < e.dim() && e.values(e.dim() - 1 - k) <= e.lambda_min() + eps) ++k;
  return {e.lambda_min(), e.vectors.rightCols(k)};
}

void validate(const HermitianMatrix& a0, const RealDiagonal& x0, const OptimizeParams& p) {
  if (p.max_iters < 1) throw std::invalid_argument("optimize: max_iters must be at least 1");
  if (!(p.gap_tol > 0.0)) throw std::invalid_argument("optimize: gap_tol must be positive");
  if (!(p.cluster_tol > 0.0)) throw std::invalid_argument("optimize: cluster_tol must be positive");
  if (!(p.step_scale > 0.0)) throw std::invalid_argument("optimize: step_scale must be positive");
  if (!(p.eps_min > 0.0)) throw std::invalid_argument("optimize: eps_min must be positive");
  if (x0.size() != a0.dim()) throw DimensionError("optimize: x0 size does not match A0");
  if (!x0.values().allFinite()) throw std::invalid_argument("optimize: x0 must be finite");
}

bool certified(const MinimalityCertificate& c, double gap_tol) {
  return c.verdict == Verdict::minimal && c.gap && *c.gap <= gap_tol;
}

class TraceRecorder {
 public:
  void record(int iteration, double phi) {
    best_ = std::min(best_, phi);
    trace_.push_back({iteration, best_});
  }
  std::vector<TracePoint> take() { return std::move(trace_); }

 private:
  double best_ = std::numeric_limits<double>::infinity();
  std::vector<TracePoint> trace_;
};

OptimizeResult finish(const HermitianMatrix& a0, Point best, int iterations, TraceRecorder& trace,
                      const OptimizeParams& params, std::optional<MinimalityCertificate> cert = std::nullopt) {
  OptimizeResult r;
  center(best);
  r.x_star = RealDiagonal(best.x);
  r.phi_star = spectral_norm(shifted(a0, r.x_star));
  r.iterations = iterations;
  r.certificate = cert ? std::move(*cert) : certify_result(a0, r.x_star, params);
  trace.record(iterations, r.phi_star);
  r.trace = trace.take();
  r.method = to_string(params.step_rule);
  return r;
}

// Gradient of the spread where the extreme eigenvalues are simple; a
// subgradient otherwise.
RVector spread_gradient(const EigenSystem& e) {
  return 0.5 * (e.vectors.col(0).cwiseAbs2() - e.vectors.col(e.dim() - 1).cwiseAbs2());
}

// BFGS on the spread with a weak Wolfe line search. On nonsmooth functions
// the inverse Hessian becomes ill-conditioned along the nonsmooth directions,
// which is what lets it keep converging; it stops when the line search fails.
OptimizeResult quasi_newton(const HermitianMatrix& a0, const RealDiagonal& x0, const OptimizeParams& params) {
  Point p = evaluate(a0, x0.values());
  center(p);
  TraceRecorder trace;
  trace.record(0, p.phi());
  const Eigen::Index n = a0.dim();
  const double scale = 1.0 + p.phi();
  RMatrix h = RMatrix::Identity(n, n);
  RVector g = spread_gradient(p.e);
  int k = 0;
  // Phi at the last attempt per cluster-size pair; a pair is retried only
  // after phi has dropped noticeably.
  std::map<std::pair<Eigen::Index, Eigen::Index>, double> tried;

  auto polish = [&](bool last) -> std::optional<OptimizeResult> {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> sizes;
    for (double tau = 1e-9; tau <= 1.1e-2; tau *= 10.0) {
      const std::pair<Eigen::Index, Eigen::Index> c{near_top(p.e, tau * scale).multiplicity(),
                                                    near_bottom(p.e, tau * scale).multiplicity()};
      if (c.first + c.second <= n && std::find(sizes.begin(), sizes.end(), c) == sizes.end()) sizes.push_back(c);
    }
    for (const auto& [t, s] : sizes) {
      if (t * t + s * s > 1200) continue;
      const auto seen = tried.find({t, s});
      if (!last && seen != tried.end() && p.phi() > seen->second - 1e-10 * scale) continue;
      tried[{t, s}] = p.phi();
      const auto polished = detail::newton_polish(a0, p.x, t, s, 30);
      if (!polished) continue;
      Point q = evaluate(a0, polished->x);
      center(q);
      if (q.phi() > p.phi() + 1e-12 * scale) continue;
      MinimalityCertificate c = certify_result(a0, RealDiagonal(q.x), params);
      if (certified(c, params.gap_tol)) return finish(a0, std::move(q), k, trace, params, std::move(c));
    }
    return std::nullopt;
  };

  for (; k < params.max_iters; ++k) {
    if (p.phi() <= params.eps_min * scale) break;
    if (k % 10 == 9 || k + 1 == params.max_iters)
      if (auto r = polish(false)) return std::move(*r);
    const RVector d = -h * g;
    const double slope = g.dot(d);
    if (!(slope < 0.0)) break;

    constexpr double c1 = 1e-4, c2 = 0.9;
    double lo = 0.0, hi = std::numeric_limits<double>::infinity(), t = 1.0;
    std::optional<Point> found;
    RVector g_new;
    for (int ls = 0; ls < 60; ++ls) {
      Point q = evaluate(a0, RVector(p.x + t * d));
      const double f = q.spread();
      if (f > p.spread() + c1 * t * slope) {
        hi = t;
      } else {
        RVector gq = spread_gradient(q.e);
        if (gq.dot(d) < c2 * slope) {
          lo = t;
        } else {
          found = std::move(q);
          g_new = std::move(gq);
          break;
        }
      }
      t = std::isinf(hi) ? 2.0 * lo + (lo == 0.0 ? 1.0 : 0.0) : 0.5 * (lo + hi);
    }
    if (!found) break;
    const RVector step = found->x - p.x;
    const RVector y = g_new - g;
    const double sy = step.dot(y);
    if (sy > 0.0) {
      if (k == 0) h *= sy / y.squaredNorm();
      const RVector hy = h * y;
      const double rho = 1.0 / sy;
      h += (rho * rho * y.dot(hy) + rho) * step * step.transpose() - rho * (hy * step.transpose() + step * hy.transpose());
    }
    p = std::move(*found);
    g = std::move(g_new);
    trace.record(k + 1, p.phi());
  }
  if (auto r = polish(true)) return std::move(*r);
  return finish(a0, std::move(p), k, trace, params);
}

RVector subgradient(const EigenSystem& e, double cluster_tol) {
  const SubdiffDescriptor d = subdiff_norm(e, cluster_tol);
  if (d.kind == ActiveSide::both_sides) {
    MomentProgramOptions o;
    o.max_iters = 500;
    o.gap_rel_tol = 1e-6;
    return least_norm_subgradient(d, o).g;
  }
  return d.generators().front().barycenter();
}

OptimizeResult subgradient_method(const HermitianMatrix& a0, const RealDiagonal& x0, const OptimizeParams& params) {
  Point p = evaluate(a0, x0.values());
  Point best = p;
  TraceRecorder trace;
  trace.record(0, p.phi());
  const double phi0 = p.phi();
  int since_improvement = 0;
  int k = 0;
  for (; k < params.max_iters; ++k) {
    if (p.phi() <= params.eps_min * (1.0 + phi0)) break;
    const RVector g = subgradient(p.e, params.cluster_tol);
    const double gg = g.squaredNorm();
    if (gg <= 1e-30) break;  // 0 in the subdifferential
    double t = params.step_scale / (k + 1.0) / std::sqrt(gg);
    if (params.step_rule == StepRule::polyak && since_improvement < 20)
      t = (p.phi() - best.phi() + params.step_scale * phi0 / (k + 1.0)) / gg;
    p = evaluate(a0, RVector(p.x - t * g));
    if (p.phi() < best.phi()) {
      best = p;
      since_improvement = 0;
    } else {
      ++since_improvement;
    }
    trace.record(k + 1, best.phi());
    if ((k + 1) % 100 == 0 && certified(certify_result(a0, RealDiagonal(best.x), params), params.gap_tol)) {
      ++k;
      break;
    }
  }
  return finish(a0, std::move(best), k, trace, params);
}

// Uniform on [-1, 1) from raw 64-bit output: identical on every platform.
double symmetric_unit(std::mt19937_64& rng) {
  return 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0;
}

}  // namespace

const char* to_string(StepRule rule) {
  switch (rule) {
    case StepRule::quasi_newton: return "quasi_newton";
    case StepRule::polyak: return "polyak";
    case StepRule::diminishing: return "diminishing";
  }
  return "unknown";
}

StepRule step_rule_from_string(const std::string& name) {
  for (StepRule r : {StepRule::quasi_newton, StepRule::polyak, StepRule::diminishing})
    if (name == to_string(r)) return r;
  throw std::invalid_argument("unknown step rule: " + name);
}

MinimalityCertificate certify_result(const HermitianMatrix& a0, const RealDiagonal& x, const OptimizeParams& params) {
  const HermitianMatrix a = shifted(a0, x);
  const Eigen::Index n = a.dim();
  const double norm = spectral_norm(a);
  if (norm <= params.cluster_tol * (1.0 + a0.matrix().cwiseAbs().maxCoeff())) {
    // ||A + D|| >= 0 = ||A||: nothing to improve. Any U = V = I/(2n) works.
    MinimalityCertificate c;
    c.verdict = Verdict::minimal;
    c.side = ActiveSide::both_sides;
    c.norm = norm;
    c.lambda_max = norm;
    c.lambda_min = -norm;
    c.gap = 0.0;
    c.duality_gap = 0.0;
    c.qmax = EigenspaceBasis{0.0, CMatrix::Identity(n, n)};
    c.qmin = EigenspaceBasis{0.0, CMatrix::Identity(n, n)};
    c.intersection_point = RVector::Constant(n, 1.0 / static_cast<double>(n));
    c.u = CMatrix::Identity(n, n) / (2.0 * static_cast<double>(n));
    c.v = *c.u;
    c.note = "A(x) vanishes";
    return c;
  }
  CertifyOptions o;
  o.gap_tol = params.gap_tol;
  o.cluster_tol = params.cluster_tol;
  return certify_minimality(a0, x, o);
}

OptimizeResult minimize_sup_norm(const HermitianMatrix& a0, const RealDiagonal& x0, const OptimizeParams& params) {
  validate(a0, x0, params);
  if (params.step_rule == StepRule::quasi_newton) return quasi_newton(a0, x0, params);
  return subgradient_method(a0, x0, params);
}

OptimizeResult multi_start(const HermitianMatrix& a0, int starts, std::uint64_t seed, const OptimizeParams& params) {
  if (starts < 1) throw std::invalid_argument("multi_start: starts must be at least 1");
  const RVector base = -a0.diagonal_entries();
  CMatrix off = a0.matrix();
  off.diagonal().setZero();
  const double radius = std::max(1e-3, off.cwiseAbs().maxCoeff());

  std::mt19937_64 rng(seed);
  std::optional<OptimizeResult> best;
  for (int s = 0; s < starts; ++s) {
    RVector x0 = base;
    if (s > 0)
      for (Eigen::Index i = 0; i < x0.size(); ++i) x0(i) += radius * symmetric_unit(rng);
    OptimizeResult r = minimize_sup_norm(a0, RealDiagonal(x0), params);
    r.start_index = s;
    if (!best || r.phi_star < best->phi_star) best = std::move(r);
  }
  return std::move(*best);
}

OptimizeResult dispatch(const HermitianMatrix& a0, const OptimizeParams& params, int starts, std::uint64_t seed) {
  validate(a0, RealDiagonal::zero(a0.dim()), params);
  CMatrix off = a0.matrix();
  off.diagonal().setZero();

  auto closed = [&](RVector x, const char* method) {
    OptimizeResult r;
    r.x_star = RealDiagonal(std::move(x));
    r.phi_star = spectral_norm(shifted(a0, r.x_star));
    r.certificate = certify_result(a0, r.x_star, params);
    r.trace = {{0, r.phi_star}};
    r.method = method;
    return r;
  };

  if (a0.dim() == 1 || off.cwiseAbs().maxCoeff() == 0.0) return closed(-a0.diagonal_entries(), "zero_offdiagonal");
  if (const auto ro = rank_one_offdiagonal(a0)) {
    // A0 = scale h h^* + Diag(e), so A0 + Diag(x) = scale (h h^* + D0) at x = scale D0 - e.
    const RVector e = a0.diagonal_entries() - ro->scale * ro->h.squared_moduli();
    const RankOneSolution s = minimizing_diagonal(ro->h);
    return closed(RVector(ro->scale * s.diagonal.values() - e), "closed_form");
  }
  return multi_start(a0, starts, seed, params);
}

}  // namespace mindiag
