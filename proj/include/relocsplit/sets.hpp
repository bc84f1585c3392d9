#pragma once

#include "relocsplit/operators.hpp"

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace relocsplit {

/// A nonempty closed convex set with a computable projection.
class ConvexSet {
 public:
  struct Point {
    Vector point;
  };
  struct Box {
    Vector lower;
    Vector upper;
  };
  /// anchor + span(basis); basis columns are orthonormal.
  struct AffineSpan {
    Vector anchor;
    Matrix basis;
  };

  static ConvexSet point(Vector p);
  static ConvexSet box(Vector lower, Vector upper);
  /// Orthonormalizes the columns of `directions` (rank-revealing).
  static ConvexSet affine_span(Vector anchor, const Matrix& directions);

  /// zer(A) = {x : M x + b = 0}. Throws UnsupportedSet when it is empty.
  static ConvexSet zero_set(const AffineMonotoneOperator& op);

  Index dim() const;
  Vector project(const Vector& x) const;
  /// The set gamma * X.
  ConvexSet scaled(double gamma) const;

  const auto& shape() const { return shape_; }

 private:
  explicit ConvexSet(std::variant<Point, Box, AffineSpan> shape) : shape_(std::move(shape)) {}
  std::variant<Point, Box, AffineSpan> shape_;
};

struct RelativeMonotonicityReport {
  int samples = 0;
  int violations = 0;
  /// min over samples of <v - u, y - P y> - mu ||y - P y||^2.
  double worst_margin = 0.0;
};

/// Checks <v - u, y - P_X y> >= mu_claim ||y - P_X y||^2 - 1e-9 with
/// v = A(y), u = A(P_X y) at the given points.
///
/// For the box normal cone the sampler uses the selection u = v = 0, which
/// lies in N_C at every point of the box.
RelativeMonotonicityReport check_relative_strong_monotonicity(const MonotoneOperator& op,
                                                              const ConvexSet& set,
                                                              double mu_claim,
                                                              std::span<const Vector> points);

/// Seeded variant: draws `sample_count` points as P_X(g) + s with g, s
/// standard normal scaled by `spread`.
RelativeMonotonicityReport check_relative_strong_monotonicity(const MonotoneOperator& op,
                                                              const ConvexSet& set,
                                                              double mu_claim, int sample_count,
                                                              std::uint64_t seed,
                                                              double spread = 3.0);

/// The sample points used by the seeded check, exposed so callers can
/// replay or rescale them.
std::vector<Vector> relative_monotonicity_samples(const ConvexSet& set, int sample_count,
                                                  std::uint64_t seed, double spread = 3.0);

/// Largest observed ||J_{g A}x - J_{g' A}x'|| / (||x - x'|| + |g - g'|) over
/// seeded pairs drawn from [-radius, radius]^d x [gamma_low, gamma_high].
double sample_resolvent_joint_lipschitz(const MonotoneOperator& op, double radius,
                                        double gamma_low, double gamma_high, int pairs,
                                        std::uint64_t seed);

}  // namespace relocsplit
