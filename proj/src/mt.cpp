#include "relocsplit/mt.hpp"

#include "relocsplit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace relocsplit {

namespace {

constexpr double kChainTol = 1e-7;

void check_blocks(const MTFamily& fam, const Vector& x) {
  if (x.size() != fam.dim()) {
    std::ostringstream msg;
    msg << "expected " << fam.count() - 1 << " blocks of length " << fam.op_dim() << ", got a vector of length "
        << x.size();
    throw BadBlockCount(msg.str());
  }
}

}  // namespace

MTFamily::MTFamily(std::vector<OperatorPtr> ops, double theta, Interval interval,
                   std::optional<double> contraction)
    : ops_(std::move(ops)), theta_(theta), interval_(interval), beta_(contraction) {
  if (ops_.size() < 2) throw BadBlockCount("Malitsky-Tam needs at least two operators");
  for (const auto& op : ops_) {
    if (!op) throw DomainError("null operator handle");
  }
  op_dim_ = ops_.front()->dim();
  for (const auto& op : ops_) {
    if (op->dim() != op_dim_) throw DimensionMismatch("Malitsky-Tam operators act on different spaces");
  }
  if (!(theta_ >= kThetaMargin && theta_ <= 1.0 - kThetaMargin)) {
    throw DomainError("theta must lie in (0,1)");
  }
  interval_.validate();
  if (beta_ && !(*beta_ >= 0.0 && *beta_ < 1.0)) {
    throw DomainError("contraction factor must lie in [0,1)");
  }
}

Vector MTFamily::apply(double gamma, const Vector& x) const {
  return mt_evaluate(*this, gamma, x).t_of_x;
}

Vector MTFamily::relocate(double delta, double gamma, const Vector& x) const {
  if (!(delta > 0.0) || !(gamma > 0.0)) throw NonPositiveStepsize("relocator stepsizes must be positive");
  check_blocks(*this, x);
  const double t = delta / gamma;
  const Vector shift = (1.0 - t) * resolvent(*ops_.front(), gamma, block(x, 0));
  Vector out(x.size());
  for (Index i = 0; i + 1 < count(); ++i) {
    out.segment(i * op_dim_, op_dim_) = t * block(x, i) + shift;
  }
  return out;
}

double MTFamily::relocator_lipschitz(double delta, double gamma) const {
  return mt_relocator_lipschitz(delta, gamma, count()).l_check;
}

MTEvaluation mt_evaluate(const MTFamily& fam, double gamma, const Vector& x) {
  check_blocks(fam, x);
  const Index n = fam.count();
  MTEvaluation out;
  out.z.reserve(static_cast<std::size_t>(n));
  out.z.push_back(resolvent(fam.op(0), gamma, fam.block(x, 0)));
  for (Index i = 1; i + 1 < n; ++i) {
    out.z.push_back(
        resolvent(fam.op(i), gamma, out.z.back() + fam.block(x, i) - fam.block(x, i - 1)));
  }
  out.z.push_back(
      resolvent(fam.op(n - 1), gamma, out.z.front() + out.z.back() - fam.block(x, n - 2)));

  out.t_of_x = x;
  for (Index i = 0; i + 1 < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    out.t_of_x.segment(i * fam.op_dim(), fam.op_dim()) += fam.theta() * (out.z[ui + 1] - out.z[ui]);
  }
  return out;
}

Vector mt_apply(const MTFamily& fam, double gamma, const Vector& x_blocks) {
  return fam.apply(gamma, x_blocks);
}

Vector mt_relocate(const MTFamily& fam, double delta, double gamma, const Vector& x_blocks) {
  return fam.relocate(delta, gamma, x_blocks);
}

MTRelocatorConstants mt_relocator_lipschitz(double delta, double gamma, Index n_ops) {
  if (!(delta > 0.0) || !(gamma > 0.0)) throw DomainError("relocator constants need positive stepsizes");
  if (n_ops < 2) throw DomainError("relocator constants need N >= 2");
  const double n = static_cast<double>(n_ops);
  const double t = delta / gamma;
  const double s = std::abs(gamma - delta) / gamma;
  MTRelocatorConstants out;
  out.l_check = std::sqrt(t) + std::sqrt(s) * std::max(std::sqrt(n - 1.0), std::sqrt(2.0 * n) * std::sqrt(t));
  out.l_hat = std::max(std::sqrt(t + (n - 1.0) * s), std::sqrt(t + 2.0 * n * t * s));
  return out;
}

IterateTrace algorithm2_run(const MTFamily& fam, const StepsizeSchedule& schedule, const Vector& x0,
                            long n_steps) {
  if (n_steps < 1) throw DomainError("n_steps must be >= 1");
  check_blocks(fam, x0);
  require_finite(x0, "x0");
  const Interval fi = fam.gamma_interval();
  const Interval si = schedule.interval();
  if (si.low < fi.low - 1e-15 || si.high > fi.high + 1e-15) {
    throw DomainError("schedule interval must lie inside the family's stepsize interval");
  }

  const Index n_ops = fam.count();
  const Index d = fam.op_dim();
  IterateTrace trace;
  trace.rows.reserve(static_cast<std::size_t>(n_steps) + 1);
  double gamma = schedule.at(0);
  Vector x = x0;
  Vector z1 = resolvent(fam.op(0), gamma, fam.block(x, 0));
  for (long n = 0; n <= n_steps; ++n) {
    if (!x.allFinite() || x.norm() > kDivergenceNorm) {
      throw DivergenceDetected("iterate " + std::to_string(n) + " left the ball of radius 1e12");
    }
    // Step 1: the resolvent chain, seeded with the carried z^1.
    Vector z_stack(n_ops * d);
    z_stack.segment(0, d) = z1;
    for (Index i = 1; i + 1 < n_ops; ++i) {
      z_stack.segment(i * d, d) = resolvent(
          fam.op(i), gamma, z_stack.segment((i - 1) * d, d) + fam.block(x, i) - fam.block(x, i - 1));
    }
    z_stack.segment((n_ops - 1) * d, d) = resolvent(
        fam.op(n_ops - 1), gamma, z1 + z_stack.segment((n_ops - 2) * d, d) - fam.block(x, n_ops - 2));

    Vector w = x;
    for (Index i = 0; i + 1 < n_ops; ++i) {
      w.segment(i * d, d) += fam.theta() * (z_stack.segment((i + 1) * d, d) - z_stack.segment(i * d, d));
    }

    TraceRow row;
    row.n = n;
    row.gamma = gamma;
    row.x = x;
    row.residual = (x - w).norm();
    row.blocks["z"] = std::move(z_stack);
    row.blocks["w"] = w;
    row.t_of_x = std::move(w);
    trace.rows.push_back(std::move(row));

    if (n < n_steps) {
      // Step 2: relocate through the first block.
      const Vector& wn = trace.rows.back().t_of_x;
      const double next = schedule.at(n + 1);
      const double t = next / gamma;
      z1 = resolvent(fam.op(0), gamma, wn.segment(0, d));
      Vector xn(wn.size());
      xn.segment(0, d) = t * wn.segment(0, d) + (1.0 - t) * z1;
      for (Index i = 1; i + 1 < n_ops; ++i) {
        xn.segment(i * d, d) = t * (wn.segment(i * d, d) - wn.segment(0, d)) + xn.segment(0, d);
      }
      x = std::move(xn);
      gamma = next;
    }
  }
  return trace;
}

double consensus_gap(const Vector& z_stack, Index n_ops, Index op_dim) {
  if (z_stack.size() != n_ops * op_dim) throw BadBlockCount("stacked z has wrong length");
  double gap = 0.0;
  for (Index i = 0; i < n_ops; ++i) {
    for (Index j = i + 1; j < n_ops; ++j) {
      gap = std::max(gap, (z_stack.segment(i * op_dim, op_dim) - z_stack.segment(j * op_dim, op_dim)).norm());
    }
  }
  return gap;
}

MTZero mt_fixed_point_to_zero(const MTFamily& fam, double gamma, const Vector& x) {
  check_blocks(fam, x);
  if (!is_fixed_point(fam, gamma, x)) {
    std::ostringstream msg;
    msg << "block vector is not a fixed point of T_gamma (residual " << fixed_point_residual(fam, gamma, x)
        << ")";
    throw NotAFixedPoint(msg.str());
  }
  const Index n_ops = fam.count();
  MTZero out;
  out.z = resolvent(fam.op(0), gamma, fam.block(x, 0));
  for (Index i = 1; i + 1 < n_ops; ++i) {
    const Vector link = resolvent(fam.op(i), gamma, fam.block(x, i) - fam.block(x, i - 1) + out.z);
    out.chain_residual = std::max(out.chain_residual, (link - out.z).norm());
  }
  const Vector last = resolvent(fam.op(n_ops - 1), gamma, 2.0 * out.z - fam.block(x, n_ops - 2));
  out.chain_residual = std::max(out.chain_residual, (last - out.z).norm());
  if (out.chain_residual > kChainTol) {
    std::ostringstream msg;
    msg << "resolvent chain residual " << out.chain_residual << " exceeds 1e-7";
    throw ChainMismatch(msg.str());
  }
  out.inclusion_residual = sum_inclusion_residual(fam.operators(), out.z);
  return out;
}

namespace {

bool lipschitz_monotone(const MonotoneOperator& op) {
  return op.single_valued() && std::isfinite(op.lipschitz());
}

// Exact operator norm of x -> T_gamma x - T_gamma 0 when every A_i is affine.
double affine_linear_part_norm(const MTFamily& fam, double gamma) {
  const Index n = fam.dim();
  const Vector base = fam.apply(gamma, Vector::Zero(n));
  Matrix lin(n, n);
  for (Index k = 0; k < n; ++k) {
    lin.col(k) = fam.apply(gamma, Vector::Unit(n, k)) - base;
  }
  return Eigen::JacobiSVD<Matrix>(lin).singularValues()(0);
}

}  // namespace

MTContractionCertificate mt_contraction_certificate(const MTFamily& fam, MTContractionCase which,
                                                    std::uint64_t seed) {
  MTContractionCertificate cert;
  const Index n_ops = fam.count();
  bool structural = true;
  if (which == MTContractionCase::kLastStrong) {
    for (Index i = 0; i + 1 < n_ops; ++i) structural = structural && lipschitz_monotone(fam.op(i));
    structural = structural && fam.op(n_ops - 1).strong_monotonicity() > 0.0;
    if (!structural) cert.note = "needs Lipschitz A_1..A_{N-1} and strongly monotone A_N";
  } else {
    for (Index i = 0; i + 1 < n_ops; ++i) {
      structural = structural && lipschitz_monotone(fam.op(i)) && fam.op(i).strong_monotonicity() > 0.0;
    }
    if (!structural) cert.note = "needs strongly monotone Lipschitz A_1..A_{N-1}";
  }
  if (!structural) return cert;

  constexpr int kGammas = 5;
  constexpr int kPairs = 2000;
  const Interval iv = fam.gamma_interval();
  bool all_affine = true;
  for (Index i = 0; i < n_ops; ++i) all_affine = all_affine && fam.op(i).as_affine() != nullptr;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Index n = fam.dim();
  double beta = 0.0;
  for (int k = 0; k < kGammas; ++k) {
    const double gamma = iv.low + (iv.high - iv.low) * k / (kGammas - 1);
    for (int p = 0; p < kPairs; ++p) {
      Vector x(n), y(n);
      for (Index j = 0; j < n; ++j) x(j) = 3.0 * normal(rng);
      // Mix far and near pairs so both scales are probed.
      const double spread = (p % 2 == 0) ? 3.0 : 1e-2;
      for (Index j = 0; j < n; ++j) y(j) = x(j) + spread * normal(rng);
      const double den = (x - y).norm();
      if (den == 0.0) continue;
      beta = std::max(beta, (fam.apply(gamma, x) - fam.apply(gamma, y)).norm() / den);
    }
    if (all_affine) beta = std::max(beta, affine_linear_part_norm(fam, gamma));
  }
  cert.beta = beta;
  cert.valid = beta < 1.0 - 1e-6;
  if (!cert.valid) {
    std::ostringstream msg;
    msg << "observed Lipschitz ratio " << beta << " is not below 1";
    cert.note = msg.str();
  }
  return cert;
}

double mt_summability_bound(const StepsizeSchedule& schedule, Index n_ops) {
  if (schedule.kind() == ScheduleKind::kConstant) return 0.0;
  if (schedule.kind() != ScheduleKind::kGeometric) {
    throw DomainError("summability bound is only available for geometric schedules");
  }
  const double c = schedule.scale();
  const double r = schedule.ratio();
  const double lo = schedule.interval().low;
  const double hi = schedule.interval().high;
  const double n = static_cast<double>(n_ops);
  const double m = c * (1.0 + r) / (2.0 * lo) +
                   std::sqrt(c * (1.0 + r) / lo) * std::max(std::sqrt(n - 1.0), std::sqrt(2.0 * n * hi / lo));
  return m / (1.0 - std::sqrt(r));
}

Vector mt_replicate(const Vector& x, Index n_ops) {
  if (n_ops < 2) throw BadBlockCount("Malitsky-Tam needs at least two operators");
  return x.replicate(n_ops - 1, 1);
}

}  // namespace relocsplit
