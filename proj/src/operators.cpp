#include "relocsplit/operators.hpp"

#include "relocsplit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace relocsplit {

namespace {

constexpr double kMaxCondition = 1e12;
constexpr double kMinRcond = 1e-14;

}  // namespace

void require_finite(const Vector& x, const char* what) {
  if (!x.allFinite()) {
    throw DomainError(std::string(what) + " has a non-finite coordinate");
  }
}

Vector MonotoneOperator::evaluate(const Vector&) const {
  throw UnsupportedOperator(describe() + " is set-valued; no pointwise evaluation");
}

namespace detail {

Vector ResolventCache::solve(const Matrix& m, double gamma, const Vector& rhs) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [gamma](const Entry& e) { return e.gamma == gamma; });
  if (it == entries_.end()) {
    Matrix shifted = Matrix::Identity(m.rows(), m.cols()) + gamma * m;
    Eigen::PartialPivLU<Matrix> lu(shifted);
    const double rcond = lu.rcond();
    entries_.push_front(Entry{gamma, std::move(lu), rcond});
    if (entries_.size() > kCapacity) entries_.pop_back();
    it = entries_.begin();
  } else if (it != entries_.begin()) {
    entries_.splice(entries_.begin(), entries_, it);
    it = entries_.begin();
  }
  if (!(it->rcond > kMinRcond)) {
    throw SingularSystem("I + gamma*M is numerically singular (rcond " +
                         std::to_string(it->rcond) + ")");
  }
  return it->lu.solve(rhs);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// AffineMonotoneOperator

AffineMonotoneOperator::AffineMonotoneOperator(Matrix m, Vector b)
    : m_(std::move(m)), b_(std::move(b)) {
  if (m_.rows() != m_.cols() || m_.rows() != b_.size() || b_.size() == 0) {
    throw DimensionMismatch("affine operator needs a square d x d matrix and a length-d offset");
  }
  if (!m_.allFinite() || !b_.allFinite()) {
    throw DomainError("affine operator data must be finite");
  }

  const Matrix sym = 0.5 * (m_ + m_.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  sym_min_ = eig.eigenvalues().minCoeff();
  sym_max_ = eig.eigenvalues().maxCoeff();
  if (sym_min_ < -kMonotoneTol) {
    std::ostringstream msg;
    msg << "matrix is not monotone: symmetric part has eigenvalue " << sym_min_;
    throw NotMonotone(msg.str());
  }
  mu_ = sym_min_ > kMonotoneTol ? sym_min_ : 0.0;
  symmetric_ = (m_ - m_.transpose()).cwiseAbs().maxCoeff() <=
               1e-12 * std::max(1.0, m_.cwiseAbs().maxCoeff());

  Eigen::JacobiSVD<Matrix> svd(m_);
  const auto& sv = svd.singularValues();
  lip_ = sv(0);
  const double smin = sv(sv.size() - 1);
  cond_ = smin > 0.0 ? lip_ / smin : std::numeric_limits<double>::infinity();
}

AffineMonotoneOperator AffineMonotoneOperator::zero(Index dim) {
  return AffineMonotoneOperator(Matrix::Zero(dim, dim), Vector::Zero(dim));
}

AffineMonotoneOperator AffineMonotoneOperator::identity(Index dim) {
  return scaled_identity(dim, 1.0);
}

AffineMonotoneOperator AffineMonotoneOperator::scaled_identity(Index dim, double scale) {
  return AffineMonotoneOperator(scale * Matrix::Identity(dim, dim), Vector::Zero(dim));
}

Vector AffineMonotoneOperator::resolvent_unchecked(double gamma, const Vector& x) const {
  if (x.size() != dim()) throw DimensionMismatch("resolvent argument has wrong dimension");
  return cache_.solve(m_, gamma, x - gamma * b_);
}

Vector AffineMonotoneOperator::evaluate(const Vector& x) const {
  if (x.size() != dim()) throw DimensionMismatch("evaluation point has wrong dimension");
  return m_ * x + b_;
}

std::string AffineMonotoneOperator::describe() const {
  std::ostringstream out;
  out << "affine(dim=" << dim() << ", mu=" << mu_ << ", L=" << lip_
      << (symmetric_ ? ", symmetric" : "") << ")";
  return out.str();
}

AffineMonotoneOperator AffineMonotoneOperator::scaled(double gamma) const {
  if (!(gamma > 0.0)) throw NonPositiveStepsize("scaling factor must be positive");
  return AffineMonotoneOperator(gamma * m_, gamma * b_);
}

AffineMonotoneOperator AffineMonotoneOperator::inverse() const {
  if (!(cond_ <= kMaxCondition)) {
    throw SingularSystem("matrix is not invertible (condition number above 1e12)");
  }
  Matrix inv = m_.partialPivLu().inverse();
  Vector off = -(inv * b_);
  return AffineMonotoneOperator(std::move(inv), std::move(off));
}

// ---------------------------------------------------------------------------
// BoxNormalCone

BoxNormalCone::BoxNormalCone(Vector lower, Vector upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size() || lower_.size() == 0) {
    throw DimensionMismatch("box bounds must have equal nonzero length");
  }
  for (Index i = 0; i < lower_.size(); ++i) {
    if (std::isnan(lower_(i)) || std::isnan(upper_(i)) || lower_(i) > upper_(i) ||
        lower_(i) == std::numeric_limits<double>::infinity() ||
        upper_(i) == -std::numeric_limits<double>::infinity()) {
      throw DomainError("box is empty in coordinate " + std::to_string(i));
    }
  }
}

Vector BoxNormalCone::resolvent_unchecked(double, const Vector& x) const { return project(x); }

double BoxNormalCone::lipschitz() const { return std::numeric_limits<double>::infinity(); }

std::string BoxNormalCone::describe() const {
  std::ostringstream out;
  out << "box_normal_cone(dim=" << dim() << ")";
  return out.str();
}

Vector BoxNormalCone::project(const Vector& x) const {
  if (x.size() != dim()) throw DimensionMismatch("projection argument has wrong dimension");
  return x.cwiseMax(lower_).cwiseMin(upper_);
}

bool BoxNormalCone::contains(const Vector& x, double tol) const {
  return x.size() == dim() && (x.array() >= lower_.array() - tol).all() &&
         (x.array() <= upper_.array() + tol).all();
}

double BoxNormalCone::normal_cone_distance(const Vector& z, const Vector& v, double tol) const {
  if (!contains(z, tol)) return std::numeric_limits<double>::infinity();
  double sq = 0.0;
  for (Index i = 0; i < dim(); ++i) {
    const bool at_low = z(i) <= lower_(i) + tol;
    const bool at_up = z(i) >= upper_(i) - tol;
    double excess = 0.0;
    if (at_low && at_up) {
      excess = 0.0;
    } else if (at_low) {
      excess = std::max(0.0, v(i));  // cone is (-inf, 0]
    } else if (at_up) {
      excess = std::max(0.0, -v(i));  // cone is [0, inf)
    } else {
      excess = v(i);
    }
    sq += excess * excess;
  }
  return std::sqrt(sq);
}

// ---------------------------------------------------------------------------

Vector resolvent(const MonotoneOperator& op, double gamma, const Vector& x) {
  if (!(gamma > 0.0)) {
    throw NonPositiveStepsize("resolvent stepsize must be positive, got " + std::to_string(gamma));
  }
  return op.resolvent_unchecked(gamma, x);
}

Vector reflected_resolvent(const MonotoneOperator& op, double gamma, const Vector& x) {
  return 2.0 * resolvent(op, gamma, x) - x;
}

Vector inverse_apply(const AffineMonotoneOperator& op, const Vector& y) {
  if (y.size() != op.dim()) throw DimensionMismatch("inverse_apply argument has wrong dimension");
  if (!(op.condition_number() <= kMaxCondition)) {
    throw SingularSystem("matrix is not invertible (condition number above 1e12)");
  }
  return op.matrix().partialPivLu().solve(y - op.offset());
}

double sum_inclusion_residual(const std::vector<OperatorPtr>& ops, const Vector& z) {
  Vector single = Vector::Zero(z.size());
  const BoxNormalCone* box = nullptr;
  for (const auto& op : ops) {
    if (op->single_valued()) {
      single += op->evaluate(z);
    } else if (op->as_box() != nullptr && box == nullptr) {
      box = op->as_box();
    } else {
      throw UnsupportedOperator("inclusion residual supports affine operators plus one box");
    }
  }
  if (box == nullptr) return single.norm();
  return box->normal_cone_distance(z, -single, 1e-9);
}

OperatorPtr make_affine(Matrix m, Vector b) {
  return std::make_shared<AffineMonotoneOperator>(std::move(m), std::move(b));
}

OperatorPtr make_box(Vector lower, Vector upper) {
  return std::make_shared<BoxNormalCone>(std::move(lower), std::move(upper));
}

}  // namespace relocsplit
