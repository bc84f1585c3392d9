#include "relocsplit/sets.hpp"

#include "relocsplit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace relocsplit {

namespace {

Vector gaussian(Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(dim);
  for (Index i = 0; i < dim; ++i) v(i) = normal(rng);
  return v;
}

}  // namespace

ConvexSet ConvexSet::point(Vector p) {
  require_finite(p, "point set");
  return ConvexSet(Point{std::move(p)});
}

ConvexSet ConvexSet::box(Vector lower, Vector upper) {
  if (lower.size() != upper.size()) throw DimensionMismatch("box bounds differ in length");
  if ((lower.array() > upper.array()).any()) throw UnsupportedSet("box is empty");
  return ConvexSet(Box{std::move(lower), std::move(upper)});
}

ConvexSet ConvexSet::affine_span(Vector anchor, const Matrix& directions) {
  if (directions.rows() != anchor.size()) throw DimensionMismatch("span directions have wrong rows");
  if (directions.cols() == 0) return point(std::move(anchor));
  Eigen::ColPivHouseholderQR<Matrix> qr(directions);
  qr.setThreshold(1e-12);
  const Index rank = qr.rank();
  if (rank == 0) return point(std::move(anchor));
  Matrix q = qr.householderQ() * Matrix::Identity(directions.rows(), rank);
  return ConvexSet(AffineSpan{std::move(anchor), std::move(q)});
}

ConvexSet ConvexSet::zero_set(const AffineMonotoneOperator& op) {
  const Matrix& m = op.matrix();
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(m);
  cod.setThreshold(1e-12);
  Vector particular = cod.solve(-op.offset());
  const double resid = (m * particular + op.offset()).norm();
  if (resid > 1e-9 * (1.0 + op.offset().norm())) {
    throw UnsupportedSet("operator has no zero (inconsistent system)");
  }
  if (cod.rank() == m.cols()) return point(std::move(particular));
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const Index rank = cod.rank();
  Matrix null_basis = svd.matrixV().rightCols(m.cols() - rank);
  return affine_span(std::move(particular), null_basis);
}

Index ConvexSet::dim() const {
  return std::visit(
      [](const auto& s) -> Index {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Point>) return s.point.size();
        if constexpr (std::is_same_v<T, Box>) return s.lower.size();
        if constexpr (std::is_same_v<T, AffineSpan>) return s.anchor.size();
      },
      shape_);
}

Vector ConvexSet::project(const Vector& x) const {
  if (x.size() != dim()) throw DimensionMismatch("projection argument has wrong dimension");
  return std::visit(
      [&x](const auto& s) -> Vector {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Point>) {
          return s.point;
        } else if constexpr (std::is_same_v<T, Box>) {
          return x.cwiseMax(s.lower).cwiseMin(s.upper);
        } else {
          return s.anchor + s.basis * (s.basis.transpose() * (x - s.anchor));
        }
      },
      shape_);
}

ConvexSet ConvexSet::scaled(double gamma) const {
  if (!(gamma > 0.0)) throw NonPositiveStepsize("set scaling must be positive");
  return std::visit(
      [gamma](const auto& s) -> ConvexSet {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Point>) {
          return ConvexSet(Point{gamma * s.point});
        } else if constexpr (std::is_same_v<T, Box>) {
          return ConvexSet(Box{gamma * s.lower, gamma * s.upper});
        } else {
          return ConvexSet(AffineSpan{gamma * s.anchor, s.basis});
        }
      },
      shape_);
}

// ---------------------------------------------------------------------------

RelativeMonotonicityReport check_relative_strong_monotonicity(const MonotoneOperator& op,
                                                              const ConvexSet& set,
                                                              double mu_claim,
                                                              std::span<const Vector> points) {
  if (set.dim() != op.dim()) throw UnsupportedSet("set and operator dimensions differ");
  RelativeMonotonicityReport report;
  report.worst_margin = std::numeric_limits<double>::infinity();
  const bool box_cone = op.as_box() != nullptr;
  if (!op.single_valued() && !box_cone) {
    throw UnsupportedOperator("relative monotonicity sampling needs a single-valued operator");
  }
  for (const Vector& y : points) {
    const Vector p = set.project(y);
    const Vector diff = y - p;
    double inner = 0.0;
    if (!box_cone) inner = (op.evaluate(y) - op.evaluate(p)).dot(diff);
    const double margin = inner - mu_claim * diff.squaredNorm();
    report.worst_margin = std::min(report.worst_margin, margin);
    if (margin < -1e-9) ++report.violations;
    ++report.samples;
  }
  if (report.samples == 0) report.worst_margin = 0.0;
  return report;
}

std::vector<Vector> relative_monotonicity_samples(const ConvexSet& set, int sample_count,
                                                  std::uint64_t seed, double spread) {
  std::mt19937_64 rng(seed);
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(std::max(sample_count, 0)));
  for (int k = 0; k < sample_count; ++k) {
    const Vector base = set.project(spread * gaussian(set.dim(), rng));
    out.push_back(base + spread * gaussian(set.dim(), rng));
  }
  return out;
}

RelativeMonotonicityReport check_relative_strong_monotonicity(const MonotoneOperator& op,
                                                              const ConvexSet& set,
                                                              double mu_claim, int sample_count,
                                                              std::uint64_t seed, double spread) {
  const auto points = relative_monotonicity_samples(set, sample_count, seed, spread);
  return check_relative_strong_monotonicity(op, set, mu_claim, points);
}

double sample_resolvent_joint_lipschitz(const MonotoneOperator& op, double radius,
                                        double gamma_low, double gamma_high, int pairs,
                                        std::uint64_t seed) {
  if (!(gamma_low > 0.0) || gamma_high < gamma_low) {
    throw NonPositiveStepsize("stepsize range must lie in (0, inf)");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-radius, radius);
  std::uniform_real_distribution<double> step(gamma_low, gamma_high);
  auto draw = [&] {
    Vector v(op.dim());
    for (Index i = 0; i < v.size(); ++i) v(i) = coord(rng);
    return v;
  };
  double worst = 0.0;
  for (int k = 0; k < pairs; ++k) {
    const Vector x = draw();
    const Vector xp = draw();
    const double g = step(rng);
    const double gp = step(rng);
    const double denom = (x - xp).norm() + std::abs(g - gp);
    if (denom == 0.0) continue;
    const double num = (resolvent(op, g, x) - resolvent(op, gp, xp)).norm();
    worst = std::max(worst, num / denom);
  }
  return worst;
}

}  // namespace relocsplit
