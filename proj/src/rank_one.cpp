#include "mindiag/rank_one.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <numbers>
#include <sstream>

namespace mindiag {

namespace {

constexpr double kHalfSlack = 1e-15;  // allowed excess of a squared modulus over 1/2
constexpr double kZeroCoordinate = 1e-12;
constexpr double kBoundaryTol = 1e-12;

double wrap_angle(double t) {
  const double pi = std::numbers::pi;
  t = std::remainder(t, 2.0 * pi);  // [-pi, pi]
  return t <= -pi ? t + 2.0 * pi : t;
}

void require_spread(const UnitVector& h, const char* who) {
  const double worst = h.squared_moduli().maxCoeff();
  if (worst > 0.5 + kHalfSlack) {
    std::ostringstream msg;
    msg << who << ": some |h_j|^2 = " << worst << " exceeds 1/2";
    throw std::invalid_argument(msg.str());
  }
}

void require_index(Eigen::Index j0, Eigen::Index n, const char* who) {
  if (j0 < 0 || j0 >= n) throw std::out_of_range(std::string(who) + ": index out of range");
}

CMatrix outer(const UnitVector& h) { return h.values() * h.values().adjoint(); }

}  // namespace

UnitVector::UnitVector(CVector h, double tol) {
  const double norm = h.norm();
  if (!std::isfinite(norm) || std::abs(norm - 1.0) > tol) {
    std::ostringstream msg;
    msg << "UnitVector: norm " << norm << " differs from 1 by more than " << tol;
    throw std::invalid_argument(msg.str());
  }
  h_ = h / norm;
}

UnitVector UnitVector::normalized(const CVector& h) {
  const double norm = h.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw std::invalid_argument("UnitVector: cannot normalize a zero vector");
  return UnitVector(CVector(h / norm), Trusted{});
}

const char* to_string(RankOneCase c) {
  switch (c) {
    case RankOneCase::big_coordinate: return "big_coordinate";
    case RankOneCase::spread: return "spread";
    case RankOneCase::boundary: return "boundary";
  }
  return "unknown";
}

RankOneSolution minimizing_diagonal(const UnitVector& h) {
  const RVector m = h.squared_moduli();
  const Eigen::Index n = m.size();
  Eigen::Index j0 = 0;
  const double big = m.maxCoeff(&j0);

  RankOneSolution s;
  s.unique = h.values().cwiseAbs().minCoeff() > kZeroCoordinate;
  if (big > 0.5 + kBoundaryTol) {
    RVector d = RVector::Constant(n, big - 1.0);
    d(j0) += 1.0 - 2.0 * big;
    s.diagonal = RealDiagonal(std::move(d));
    s.minimal_norm = std::sqrt(big) * std::sqrt(std::max(0.0, 1.0 - big));
    s.case_tag = RankOneCase::big_coordinate;
    s.big_index = j0;
  } else {
    s.diagonal = RealDiagonal(RVector::Constant(n, -0.5));
    s.minimal_norm = 0.5;
    s.case_tag = big >= 0.5 - kBoundaryTol ? RankOneCase::boundary : RankOneCase::spread;
    s.big_index = s.case_tag == RankOneCase::boundary ? j0 : -1;
  }
  return s;
}

RVector closed_polygon_angles(std::span<const double> lengths) {
  const auto n = static_cast<Eigen::Index>(lengths.size());
  if (n == 0) throw std::invalid_argument("closed_polygon_angles: empty input");
  double total = 0.0;
  for (double l : lengths) {
    if (!std::isfinite(l) || l < 0.0) throw std::invalid_argument("closed_polygon_angles: lengths must be nonnegative");
    if (l > 0.5 + kHalfSlack)
      throw std::invalid_argument("closed_polygon_angles: a length exceeds 1/2, no closed polygon exists");
    total += l;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("closed_polygon_angles: lengths must sum to 1");

  // First-fit decreasing into three bins of capacity 1/2. Every bin ends at
  // most 1/2, so the bin sums obey the triangle inequality.
  std::vector<std::size_t> order(lengths.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lengths[a] > lengths[b]; });
  std::array<double, 3> sums{};
  std::vector<int> group(lengths.size(), 0);
  for (std::size_t idx : order) {
    const double l = lengths[idx];
    int g = 0;
    while (g < 3 && sums[g] + l > 0.5 + 1e-12) ++g;
    if (g == 3) g = static_cast<int>(std::min_element(sums.begin(), sums.end()) - sums.begin());
    group[idx] = g;
    sums[g] += l;
  }

  // Triangle P0 = 0, P1 = (S1, 0), P2 with |P2 - P1| = S2 and |P2| = S3.
  const double s1 = sums[0], s2 = sums[1], s3 = sums[2];
  Complex p2(0.0, 0.0);
  if (s3 > 0.0) {
    const double cos_a = s1 > 0.0 ? std::clamp((s1 * s1 + s3 * s3 - s2 * s2) / (2.0 * s1 * s3), -1.0, 1.0) : 1.0;
    p2 = s3 * Complex(cos_a, std::sqrt(std::max(0.0, 1.0 - cos_a * cos_a)));
  }
  const Complex p1(s1, 0.0);
  const std::array<double, 3> direction{0.0, s2 > 0.0 ? std::arg(p2 - p1) : 0.0,
                                        s1 > 0.0 ? std::arg(-p2) : std::numbers::pi};

  RVector theta(n);
  const double base = direction[static_cast<std::size_t>(group[0])];
  for (Eigen::Index j = 0; j < n; ++j) theta(j) = wrap_angle(direction[static_cast<std::size_t>(group[j])] - base);
  return theta;
}

UnitVector orthogonal_partner(const UnitVector& h) {
  require_spread(h, "orthogonal_partner");
  const RVector m = h.squared_moduli();
  const RVector theta = closed_polygon_angles(std::span<const double>(m.data(), static_cast<std::size_t>(m.size())));
  CVector k(h.size());
  for (Eigen::Index j = 0; j < h.size(); ++j) {
    const double alpha = std::arg(h[j]);
    k(j) = std::polar(std::abs(h[j]), -(theta(j) - alpha));
  }
  return UnitVector::normalized(k);
}

NonuniquePair nonunique_diagonals(const UnitVector& h, Eigen::Index j0) {
  require_index(j0, h.size(), "nonunique_diagonals");
  require_spread(h, "nonunique_diagonals");
  if (std::abs(h[j0]) > kZeroCoordinate) throw std::invalid_argument("nonunique_diagonals: h_{j0} must vanish");
  const Eigen::Index n = h.size();
  const CMatrix minus = outer(h) - 0.5 * CMatrix::Identity(n, n);
  CMatrix plus = minus;
  plus(j0, j0) += 1.0;
  return {HermitianMatrix(plus), HermitianMatrix(minus)};
}

HermitianMatrix generate_minimal_from_negative(const UnitVector& h) {
  require_spread(h, "generate_minimal_from_negative");
  if (h.values().cwiseAbs().minCoeff() <= kZeroCoordinate)
    throw std::invalid_argument("generate_minimal_from_negative: every h_j must be nonzero");
  const Eigen::Index n = h.size();
  return HermitianMatrix(CMatrix(0.5 * CMatrix::Identity(n, n) - outer(h)));
}

HermitianMatrix generate_minimal_from_negative(const UnitVector& h, Eigen::Index n) {
  if (n < 1 || n > h.size()) throw std::invalid_argument("generate_minimal_from_negative: truncation out of range");
  return generate_minimal_from_negative(UnitVector::normalized(h.values().head(n)));
}

ColumnCriterion verify_column_criterion(const HermitianMatrix& t, Eigen::Index j0, double tol) {
  const Eigen::Index n = t.dim();
  require_index(j0, n, "verify_column_criterion");
  const CMatrix& m = t.matrix();
  const CVector col = m.col(j0);

  ColumnCriterion c;
  c.column_norm = col.norm();
  c.zero_diagonal = std::abs(m(j0, j0)) <= tol;
  c.full_column = true;
  c.orthogonal = true;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k == j0) continue;
    if (std::abs(m(k, j0)) <= tol) c.full_column = false;
    if (std::abs(col.dot(m.col(k))) > tol * (1.0 + c.column_norm * m.col(k).norm())) c.orthogonal = false;
  }
  CMatrix rest = m;
  rest.row(j0).setZero();
  rest.col(j0).setZero();
  c.remainder_norm = spectral_norm(HermitianMatrix(rest));
  c.dominates = c.column_norm >= c.remainder_norm - tol;
  return c;
}

LemmaDiagonal lemma_diagonal(const UnitVector& h, Eigen::Index j0) {
  require_index(j0, h.size(), "lemma_diagonal");
  LemmaDiagonal out;
  out.entries.resize(h.size());
  for (Eigen::Index j = 0; j < h.size(); ++j) {
    const double mj = std::norm(h[j]);
    out.entries(j) = j == j0 ? Complex(mj, 0.0) : mj - std::conj(h[j]) * h[j0] * (1.0 - mj);
  }
  out.max_imag = out.entries.imag().cwiseAbs().maxCoeff();
  out.is_real = out.max_imag <= 1e-12;
  return out;
}

std::optional<RankOneStructure> rank_one_offdiagonal(const HermitianMatrix& a0, double ratio_tol) {
  const Eigen::Index n = a0.dim();
  CMatrix off = a0.matrix();
  off.diagonal().setZero();
  const double scale = off.cwiseAbs().maxCoeff();
  if (n < 2 || scale == 0.0) return std::nullopt;

  const double zero = 1e-14 * scale;
  std::vector<Eigen::Index> support;
  for (Eigen::Index j = 0; j < n; ++j)
    if (off.row(j).cwiseAbs().maxCoeff() > zero) support.push_back(j);
  const auto s = static_cast<Eigen::Index>(support.size());

  // Restricted off-diagonal block and the diagonal completing it.
  CMatrix block(s, s);
  for (Eigen::Index i = 0; i < s; ++i)
    for (Eigen::Index j = 0; j < s; ++j) block(i, j) = off(support[i], support[j]);
  RVector d(s);
  if (s == 2) {
    d.setConstant(std::abs(block(0, 1)));
  } else {
    for (Eigen::Index i = 0; i < s; ++i)
      for (Eigen::Index j = i + 1; j < s; ++j)
        if (std::abs(block(i, j)) <= zero) return std::nullopt;
    const double sign = (block(0, 1) * block(1, 2) * block(2, 0)).real() < 0.0 ? -1.0 : 1.0;
    for (Eigen::Index j = 0; j < s; ++j) {
      const Eigen::Index k = j == 0 ? 1 : 0;
      const Eigen::Index l = j == s - 1 ? s - 2 : s - 1;
      d(j) = sign * std::abs(block(j, k)) * std::abs(block(j, l)) / std::abs(block(k, l));
    }
  }
  block.diagonal() = d.cast<Complex>();

  const EigenSystem e = eigendecompose(HermitianMatrix(block));
  const double top = e.values(0), bottom = e.values(s - 1);
  const bool positive = std::abs(top) >= std::abs(bottom);
  const double lead = positive ? top : bottom;
  double rest = 0.0;  // second singular value
  for (Eigen::Index i = 0; i < s; ++i)
    if (i != (positive ? 0 : s - 1)) rest = std::max(rest, std::abs(e.values(i)));
  if (rest > ratio_tol * std::abs(lead)) return std::nullopt;

  CVector h = CVector::Zero(n);
  const CVector v = e.vectors.col(positive ? 0 : s - 1);
  for (Eigen::Index i = 0; i < s; ++i) h(support[i]) = v(i);
  return RankOneStructure{lead, UnitVector::normalized(h)};
}

}  // namespace mindiag
