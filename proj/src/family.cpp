#include "relocsplit/family.hpp"

#include "relocsplit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace relocsplit {

std::optional<double> OperatorFamily::effective_averagedness() const {
  if (auto alpha = averagedness()) return alpha;
  if (auto beta = contraction_factor()) return 0.5 * (*beta + 1.0);
  return std::nullopt;
}

std::optional<double> OperatorFamily::certified_kappa() const {
  if (auto beta = contraction_factor()) return 1.0 / (1.0 - *beta);
  return std::nullopt;
}

// ---------------------------------------------------------------------------

ScalarShiftFamily::ScalarShiftFamily(double beta, Interval interval)
    : beta_(beta), interval_(interval) {
  if (!(beta >= 0.0 && beta < 1.0)) throw DomainError("scalar shift beta must lie in [0,1)");
  interval_.validate();
}

Vector ScalarShiftFamily::apply(double gamma, const Vector& x) const {
  if (x.size() != 1) throw DimensionMismatch("scalar shift family acts on R");
  Vector out(1);
  out(0) = gamma + beta_ * (x(0) - gamma);
  return out;
}

Vector ScalarShiftFamily::relocate(double delta, double, const Vector& x) const {
  if (x.size() != 1) throw DimensionMismatch("scalar shift family acts on R");
  Vector out(1);
  out(0) = delta;
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> IterateTrace::residuals() const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.residual);
  return out;
}

std::vector<double> IterateTrace::gammas() const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.gamma);
  return out;
}

std::vector<Vector> IterateTrace::block(const std::string& name) const {
  std::vector<Vector> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    auto it = r.blocks.find(name);
    if (it == r.blocks.end()) {
      throw MissingBlocks("trace row " + std::to_string(r.n) + " has no block '" + name + "'");
    }
    out.push_back(it->second);
  }
  return out;
}

void IterateTrace::validate() const {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].n != static_cast<long>(i)) throw DomainError("trace rows are not contiguous");
    if (!(rows[i].residual >= 0.0) || !std::isfinite(rows[i].residual)) {
      throw DomainError("trace residual must be finite and nonnegative");
    }
  }
}

// ---------------------------------------------------------------------------

double fixed_point_residual(const OperatorFamily& family, double gamma, const Vector& x) {
  return (x - family.apply(gamma, x)).norm();
}

bool is_fixed_point(const OperatorFamily& family, double gamma, const Vector& x, double tol) {
  return fixed_point_residual(family, gamma, x) <= tol * (1.0 + x.norm());
}

namespace {

void check_schedule_fits(const OperatorFamily& family, const StepsizeSchedule& schedule) {
  const Interval fam = family.gamma_interval();
  const Interval sch = schedule.interval();
  if (sch.low < fam.low - 1e-15 || sch.high > fam.high + 1e-15) {
    throw DomainError("schedule interval must lie inside the family's stepsize interval");
  }
}

void check_iterate(const Vector& x, long n) {
  if (!x.allFinite() || x.norm() > kDivergenceNorm) {
    std::ostringstream msg;
    msg << "iterate " << n << " left the ball of radius 1e12";
    throw DivergenceDetected(msg.str());
  }
}

}  // namespace

IterateTrace relocated_iterate(const OperatorFamily& family, const StepsizeSchedule& schedule,
                               const Vector& x0, long n_steps) {
  if (n_steps < 1) throw DomainError("n_steps must be >= 1");
  if (x0.size() != family.dim()) throw DimensionMismatch("x0 has wrong dimension");
  require_finite(x0, "x0");
  check_schedule_fits(family, schedule);

  IterateTrace trace;
  trace.rows.reserve(static_cast<std::size_t>(n_steps) + 1);
  Vector x = x0;
  double gamma = schedule.at(0);
  for (long n = 0; n <= n_steps; ++n) {
    check_iterate(x, n);
    TraceRow row;
    row.n = n;
    row.gamma = gamma;
    row.t_of_x = family.apply(gamma, x);
    row.residual = (x - row.t_of_x).norm();
    row.x = x;
    if (n < n_steps) {
      const double next_gamma = schedule.at(n + 1);
      x = family.relocate(next_gamma, gamma, row.t_of_x);
      gamma = next_gamma;
    }
    trace.rows.push_back(std::move(row));
  }
  return trace;
}

IterateTrace relocator_only_sequence(const OperatorFamily& family,
                                     const StepsizeSchedule& schedule, const Vector& c0,
                                     long n_steps) {
  if (n_steps < 1) throw DomainError("n_steps must be >= 1");
  if (c0.size() != family.dim()) throw DimensionMismatch("c0 has wrong dimension");
  check_schedule_fits(family, schedule);
  const double gamma0 = schedule.at(0);
  if (!is_fixed_point(family, gamma0, c0)) {
    std::ostringstream msg;
    msg << "c0 is not a fixed point of T_gamma0 (residual "
        << fixed_point_residual(family, gamma0, c0) << ")";
    throw NotAFixedPoint(msg.str());
  }

  IterateTrace trace;
  Vector c = c0;
  double gamma = gamma0;
  for (long n = 0; n <= n_steps; ++n) {
    check_iterate(c, n);
    TraceRow row;
    row.n = n;
    row.gamma = gamma;
    row.t_of_x = family.apply(gamma, c);
    row.residual = (c - row.t_of_x).norm();
    row.x = c;
    if (n < n_steps) {
      const double next_gamma = schedule.at(n + 1);
      c = family.relocate(next_gamma, gamma, c);
      gamma = next_gamma;
    }
    trace.rows.push_back(std::move(row));
  }
  return trace;
}

SummabilityReport summability_report(const OperatorFamily& family,
                                     const StepsizeSchedule& schedule, long n_terms) {
  if (n_terms < 10) throw DomainError("summability needs at least 10 terms");
  SummabilityReport report;
  report.partial_sums.reserve(static_cast<std::size_t>(n_terms));
  double sum = 0.0;
  double gamma = schedule.at(0);
  for (long n = 0; n < n_terms; ++n) {
    const double next = schedule.at(n + 1);
    sum += family.relocator_lipschitz(next, gamma) - 1.0;
    report.partial_sums.push_back(sum);
    gamma = next;
  }
  const long tail = std::max<long>(1, n_terms / 10);
  const double increment =
      report.partial_sums.back() - report.partial_sums[static_cast<std::size_t>(n_terms - 1 - tail)];
  report.converged = std::isfinite(sum) && increment < 1e-10;
  return report;
}

GammaLipschitzProbe gamma_lipschitz_probe(const OperatorFamily& family,
                                          const std::vector<std::pair<Vector, double>>& fixed_points,
                                          const std::vector<double>& deltas) {
  const Interval interval = family.gamma_interval();
  GammaLipschitzProbe probe;
  for (const auto& [x, gamma] : fixed_points) {
    if (!is_fixed_point(family, gamma, x)) {
      throw NotAFixedPoint("probe point is not a fixed point of T_gamma");
    }
    for (double delta : deltas) {
      if (!interval.contains(delta)) throw DomainError("probe stepsize outside the interval");
      if (delta == gamma) continue;
      const double ratio =
          (family.relocate(delta, gamma, x) - x).norm() / std::abs(delta - gamma);
      if (ratio > probe.l_estimate || probe.point.size() == 0) {
        probe.l_estimate = std::max(probe.l_estimate, ratio);
        probe.point = x;
        probe.gamma = gamma;
        probe.delta = delta;
      }
    }
  }
  return probe;
}

}  // namespace relocsplit
