#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace relocsplit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

class AffineMonotoneOperator;
class BoxNormalCone;

/// A maximally monotone operator on R^d, accessed through its resolvent.
///
/// Set-valued operators are never represented by their graph; every
/// algorithm in the library touches them only via J_{gamma A}.
class MonotoneOperator {
 public:
  virtual ~MonotoneOperator() = default;

  virtual Index dim() const = 0;

  /// J_{gamma A}(x) = (Id + gamma A)^{-1} x. Callers go through the free
  /// function `resolvent`, which validates gamma.
  virtual Vector resolvent_unchecked(double gamma, const Vector& x) const = 0;

  virtual bool single_valued() const = 0;

  /// Evaluates A(x). Only available for single-valued operators.
  virtual Vector evaluate(const Vector& x) const;

  /// Strong monotonicity modulus (0 when merely monotone).
  virtual double strong_monotonicity() const = 0;

  /// Lipschitz constant; +inf for set-valued operators.
  virtual double lipschitz() const = 0;

  virtual std::string describe() const = 0;

  virtual const AffineMonotoneOperator* as_affine() const { return nullptr; }
  virtual const BoxNormalCone* as_box() const { return nullptr; }
};

using OperatorPtr = std::shared_ptr<const MonotoneOperator>;

namespace detail {

// Small LRU of LU factors of (I + gamma M), keyed by the exact gamma.
// Copies start empty; the mutex makes a shared operator safe to use from
// concurrent runs.
class ResolventCache {
 public:
  static constexpr std::size_t kCapacity = 8;

  ResolventCache() = default;
  ResolventCache(const ResolventCache&) {}
  ResolventCache& operator=(const ResolventCache&) { return *this; }

  Vector solve(const Matrix& m, double gamma, const Vector& rhs) const;

 private:
  struct Entry {
    double gamma;
    Eigen::PartialPivLU<Matrix> lu;
    double rcond;
  };
  mutable std::mutex mutex_;
  mutable std::list<Entry> entries_;
};

}  // namespace detail

/// A(x) = M x + b with (M + M^T)/2 positive semidefinite.
///
/// The strong monotonicity modulus and Lipschitz constant are computed from
/// M at construction and are never taken from the caller.
class AffineMonotoneOperator final : public MonotoneOperator {
 public:
  /// Eigenvalue tolerance of the monotonicity check.
  static constexpr double kMonotoneTol = 1e-10;

  AffineMonotoneOperator(Matrix m, Vector b);

  static AffineMonotoneOperator zero(Index dim);
  static AffineMonotoneOperator identity(Index dim);
  static AffineMonotoneOperator scaled_identity(Index dim, double scale);

  Index dim() const override { return b_.size(); }
  Vector resolvent_unchecked(double gamma, const Vector& x) const override;
  bool single_valued() const override { return true; }
  Vector evaluate(const Vector& x) const override;
  double strong_monotonicity() const override { return mu_; }
  double lipschitz() const override { return lip_; }
  std::string describe() const override;
  const AffineMonotoneOperator* as_affine() const override { return this; }

  const Matrix& matrix() const { return m_; }
  const Vector& offset() const { return b_; }
  bool symmetric() const { return symmetric_; }

  /// Smallest / largest eigenvalue of the symmetric part (unclamped).
  double sym_min_eigenvalue() const { return sym_min_; }
  double sym_max_eigenvalue() const { return sym_max_; }

  /// Ratio of extreme singular values of M (+inf when M is singular).
  double condition_number() const { return cond_; }

  /// The operator gamma * A.
  AffineMonotoneOperator scaled(double gamma) const;

  /// A^{-1} as an affine operator y -> M^{-1}(y - b). Throws SingularSystem
  /// when M is not invertible within tolerance.
  AffineMonotoneOperator inverse() const;

 private:
  Matrix m_;
  Vector b_;
  bool symmetric_ = false;
  double sym_min_ = 0.0;
  double sym_max_ = 0.0;
  double mu_ = 0.0;
  double lip_ = 0.0;
  double cond_ = 0.0;
  detail::ResolventCache cache_;
};

/// Normal cone of the box {x : lower <= x <= upper}; entries may be infinite.
class BoxNormalCone final : public MonotoneOperator {
 public:
  BoxNormalCone(Vector lower, Vector upper);

  Index dim() const override { return lower_.size(); }
  /// Componentwise clamp, independent of gamma.
  Vector resolvent_unchecked(double gamma, const Vector& x) const override;
  bool single_valued() const override { return false; }
  double strong_monotonicity() const override { return 0.0; }
  double lipschitz() const override;
  std::string describe() const override;
  const BoxNormalCone* as_box() const override { return this; }

  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

  Vector project(const Vector& x) const;
  bool contains(const Vector& x, double tol = 0.0) const;

  /// dist(v, N_C(z)) for z in the box; +inf when z lies outside.
  double normal_cone_distance(const Vector& z, const Vector& v, double tol = 1e-12) const;

 private:
  Vector lower_;
  Vector upper_;
};

/// J_{gamma A}(x). Throws NonPositiveStepsize for gamma <= 0.
Vector resolvent(const MonotoneOperator& op, double gamma, const Vector& x);

/// 2 J_{gamma A}(x) - x.
Vector reflected_resolvent(const MonotoneOperator& op, double gamma, const Vector& x);

/// Solves M x + b = y. Throws SingularSystem when M is singular or its
/// condition number exceeds 1e12.
Vector inverse_apply(const AffineMonotoneOperator& op, const Vector& y);

OperatorPtr make_affine(Matrix m, Vector b);
OperatorPtr make_box(Vector lower, Vector upper);

/// dist(0, (A_1 + ... + A_k) z) for affine operators plus at most one box
/// normal cone. Throws UnsupportedOperator for other mixes.
double sum_inclusion_residual(const std::vector<OperatorPtr>& ops, const Vector& z);

/// Throws DomainError when x has a NaN or infinite coordinate.
void require_finite(const Vector& x, const char* what);

}  // namespace relocsplit
