#include "relocsplit/dr.hpp"

#include "relocsplit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace relocsplit {

namespace {

// Same formula as dr_contraction_factor; L = 0 is allowed (A1 constant).
double contraction_formula(double gamma, double mu, double lip) {
  const double gm = gamma * mu;
  const double gl = gamma * lip;
  const double cross = 1.0 - 1.0 / ((1.0 + gl) * (1.0 + gl)) - 1.0 / (1.0 + gl * gl);
  const double radicand = 2.0 * gm * gm + 2.0 * gm + 1.0 + 2.0 * cross * gm * (1.0 + gm);
  return (std::sqrt(std::max(0.0, radicand)) + 1.0) / (2.0 * (1.0 + gm));
}

double grid_max_contraction(const Interval& interval, double mu, double lip) {
  constexpr int kGrid = 1000;
  double best = std::max(contraction_formula(interval.low, mu, lip),
                         contraction_formula(interval.high, mu, lip));
  for (int k = 0; k < kGrid; ++k) {
    const double g = interval.low + (interval.high - interval.low) * k / (kGrid - 1);
    best = std::max(best, contraction_formula(g, mu, lip));
  }
  return best + 1e-6;
}

}  // namespace

DRFamily::DRFamily(OperatorPtr a1, OperatorPtr a2, Interval interval)
    : a1_(std::move(a1)), a2_(std::move(a2)), interval_(interval) {
  if (!a1_ || !a2_) throw DomainError("DR family needs two operators");
  if (a1_->dim() != a2_->dim()) throw DimensionMismatch("DR operators act on different spaces");
  interval_.validate();
  if (a1_->single_valued() && std::isfinite(a1_->lipschitz()) && a2_->strong_monotonicity() > 0.0) {
    const double beta =
        grid_max_contraction(interval_, a2_->strong_monotonicity(), a1_->lipschitz());
    if (beta < 1.0) beta_ = beta;
  }
}

Vector DRFamily::apply(double gamma, const Vector& x) const {
  if (x.size() != dim()) throw DimensionMismatch("DR argument has wrong dimension");
  const Vector z = resolvent(*a1_, gamma, x);
  return x - z + resolvent(*a2_, gamma, 2.0 * z - x);
}

Vector DRFamily::relocate(double delta, double gamma, const Vector& x) const {
  if (!(delta > 0.0) || !(gamma > 0.0)) throw NonPositiveStepsize("relocator stepsizes must be positive");
  if (x.size() != dim()) throw DimensionMismatch("DR argument has wrong dimension");
  const double t = delta / gamma;
  return t * x + (1.0 - t) * resolvent(*a1_, gamma, x);
}

double DRFamily::relocator_lipschitz(double delta, double gamma) const {
  return std::max(1.0, delta / gamma);
}

Vector dr_apply(const DRFamily& fam, double gamma, const Vector& x) { return fam.apply(gamma, x); }

Vector dr_relocate(const DRFamily& fam, double delta, double gamma, const Vector& x) {
  return fam.relocate(delta, gamma, x);
}

IterateTrace algorithm1_run(const DRFamily& fam, const StepsizeSchedule& schedule, const Vector& x0,
                            long n_steps) {
  if (n_steps < 1) throw DomainError("n_steps must be >= 1");
  if (x0.size() != fam.dim()) throw DimensionMismatch("x0 has wrong dimension");
  require_finite(x0, "x0");
  const Interval fi = fam.gamma_interval();
  const Interval si = schedule.interval();
  if (si.low < fi.low - 1e-15 || si.high > fi.high + 1e-15) {
    throw DomainError("schedule interval must lie inside the family's stepsize interval");
  }

  IterateTrace trace;
  trace.rows.reserve(static_cast<std::size_t>(n_steps) + 1);
  double gamma = schedule.at(0);
  Vector x = x0;
  Vector z = resolvent(fam.a1(), gamma, x);
  for (long n = 0; n <= n_steps; ++n) {
    if (!x.allFinite() || x.norm() > kDivergenceNorm) {
      throw DivergenceDetected("iterate " + std::to_string(n) + " left the ball of radius 1e12");
    }
    const Vector y = resolvent(fam.a2(), gamma, 2.0 * z - x);
    Vector w = x - z + y;

    TraceRow row;
    row.n = n;
    row.gamma = gamma;
    row.x = x;
    row.residual = (x - w).norm();
    row.blocks["z"] = z;
    row.blocks["y"] = y;
    row.blocks["w"] = w;
    row.t_of_x = std::move(w);
    trace.rows.push_back(std::move(row));

    if (n < n_steps) {
      const Vector& wn = trace.rows.back().t_of_x;
      const double next = schedule.at(n + 1);
      const double t = next / gamma;
      z = resolvent(fam.a1(), gamma, wn);
      x = t * wn + (1.0 - t) * z;
      gamma = next;
    }
  }
  return trace;
}

PrimalDualSequences primal_dual_extract(const IterateTrace& trace) {
  PrimalDualSequences out;
  out.z = trace.block("z");
  out.y = trace.block("y");
  const auto w = trace.block("w");
  out.g.reserve(trace.size());
  out.h.reserve(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const double gamma = trace.rows[i].gamma;
    out.g.push_back((trace.rows[i].x - out.z[i]) / gamma);
    out.h.push_back((w[i] - out.y[i]) / gamma);
  }
  return out;
}

double dr_contraction_factor(double gamma, double mu, double lipschitz) {
  if (!(gamma > 0.0) || !(mu > 0.0) || !(lipschitz > 0.0)) {
    throw DomainError("contraction factor needs positive gamma, mu and L");
  }
  const double beta = contraction_formula(gamma, mu, lipschitz);
  if (!(beta > 0.0 && beta < 1.0)) {
    std::ostringstream msg;
    msg << "contraction factor " << beta << " fell outside (0,1)";
    throw DomainError(msg.str());
  }
  return beta;
}

double dr_uniform_contraction_factor(const Interval& interval, double mu, double lipschitz) {
  interval.validate();
  if (!(mu > 0.0) || !(lipschitz > 0.0)) {
    throw DomainError("contraction factor needs positive mu and L");
  }
  return grid_max_contraction(interval, mu, lipschitz);
}

double dr_regularity_constant(double gamma, double mu, double rho) {
  if (!(gamma > 0.0) || !(mu > 0.0) || !(rho > 0.0)) {
    throw DomainError("regularity constant needs positive gamma, mu and rho");
  }
  return 4.0 * (1.0 + std::max(1.0 / (gamma * mu), gamma / rho));
}

RegularityModuli dr_default_moduli(const DRFamily& fam) {
  const auto* a1 = fam.a1().as_affine();
  if (a1 == nullptr || !a1->symmetric() || !(a1->sym_min_eigenvalue() > 0.0) ||
      a1->strong_monotonicity() == 0.0) {
    throw UnsupportedOperator("default moduli need a symmetric positive definite A1");
  }
  return RegularityModuli{a1->sym_min_eigenvalue(), 1.0 / a1->sym_max_eigenvalue()};
}

FixDecomposition fix_decomposition_check(const DRFamily& fam, double gamma, const Vector& x_fixed) {
  if (!is_fixed_point(fam, gamma, x_fixed)) {
    std::ostringstream msg;
    msg << "point is not a fixed point of T_gamma (residual "
        << fixed_point_residual(fam, gamma, x_fixed) << ")";
    throw NotAFixedPoint(msg.str());
  }
  FixDecomposition out;
  out.z = resolvent(fam.a1(), gamma, x_fixed);
  out.g = (x_fixed - out.z) / gamma;
  out.reconstruction_error = (out.z + gamma * out.g - x_fixed).norm();
  out.primal_residual = sum_inclusion_residual({fam.a1_ptr(), fam.a2_ptr()}, out.z);

  const auto* a1 = fam.a1().as_affine();
  const auto* a2 = fam.a2().as_affine();
  if (a1 != nullptr && a2 != nullptr && a1->condition_number() <= 1e12 &&
      a2->condition_number() <= 1e12) {
    out.dual_residual = (inverse_apply(*a1, out.g) - inverse_apply(*a2, -out.g)).norm();
    out.dual_via_inverse = true;
  } else {
    out.dual_residual = (out.z - resolvent(fam.a2(), gamma, 2.0 * out.z - x_fixed)).norm();
  }
  return out;
}

double dr_summability_bound(const StepsizeSchedule& schedule) {
  if (schedule.kind() == ScheduleKind::kConstant) return 0.0;
  if (schedule.kind() != ScheduleKind::kGeometric) {
    throw DomainError("summability bound is only available for geometric schedules");
  }
  const double r = schedule.ratio();
  return schedule.scale() * (1.0 + r) / ((1.0 - r) * schedule.interval().low);
}

Vector dr_affine_primal_solution(const DRFamily& fam) {
  const auto* a1 = fam.a1().as_affine();
  const auto* a2 = fam.a2().as_affine();
  if (a1 == nullptr || a2 == nullptr) {
    throw UnsupportedOperator("direct primal solve needs two affine operators");
  }
  const AffineMonotoneOperator sum(a1->matrix() + a2->matrix(), a1->offset() + a2->offset());
  return inverse_apply(sum, Vector::Zero(sum.dim()));
}

}  // namespace relocsplit
