#include "relocsplit/diagnostics.hpp"

#include "relocsplit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

namespace relocsplit {

namespace {

constexpr long kMinSamples = 20;

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 1.0;
};

// Least squares of log e_n against n on [begin, end).
LineFit fit_log_line(std::span<const double> e, long begin, long end) {
  const double m = static_cast<double>(end - begin);
  double sx = 0.0, sy = 0.0;
  for (long n = begin; n < end; ++n) {
    sx += static_cast<double>(n);
    sy += std::log(e[static_cast<std::size_t>(n)]);
  }
  const double mx = sx / m;
  const double my = sy / m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (long n = begin; n < end; ++n) {
    const double dx = static_cast<double>(n) - mx;
    const double dy = std::log(e[static_cast<std::size_t>(n)]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  LineFit fit;
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  const double ss_res = std::max(0.0, syy - fit.slope * sxy);
  fit.r2 = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return fit;
}

double round_key(double gamma) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.11e", gamma);
  return std::strtod(buf, nullptr);
}

}  // namespace

RateEstimate fit_linear_rate(std::span<const double> errors, std::optional<long> burn_in, double floor) {
  const long total = static_cast<long>(errors.size());
  if (total < kMinSamples) {
    throw TooFewSamples("rate fit needs at least 20 entries, got " + std::to_string(total));
  }
  for (double e : errors) {
    if (!(e >= 0.0) || !std::isfinite(e)) throw DomainError("errors must be finite and nonnegative");
  }
  if (burn_in && (*burn_in < 0 || total - *burn_in < kMinSamples)) {
    throw TooFewSamples("fewer than 20 entries remain after burn-in");
  }

  long cut = 0;
  while (cut < total && errors[static_cast<std::size_t>(cut)] >= floor) ++cut;

  RateEstimate est;
  if (cut == 0) {
    est.C = 0.0;
    est.r = 0.0;
    est.fit_quality = 1.0;
    est.r_linear = true;
    est.note = "identically below the floor";
    return est;
  }

  long begin = burn_in.value_or(std::max<long>(5, cut / 10));
  if (cut - begin < 3) {
    // The floor arrived before the burn-in ended: the sequence collapsed.
    begin = 0;
    if (cut < 3) {
      est.C = *std::max_element(errors.begin(), errors.begin() + cut);
      est.r = 0.0;
      est.fit_quality = 1.0;
      est.r_linear = true;
      est.n_used = cut;
      est.note = "reached the floor within two steps";
      return est;
    }
  }
  est.burn_in = begin;
  est.n_used = cut - begin;

  const LineFit fit = fit_log_line(errors, begin, cut);
  est.r = std::exp(fit.slope);
  est.fit_quality = fit.r2;

  double c = 0.0;
  for (long n = begin; n < cut; ++n) {
    c = std::max(c, errors[static_cast<std::size_t>(n)] / std::pow(est.r, static_cast<double>(n)));
  }
  est.C = c;

  bool drifting = false;
  if (est.n_used >= kMinSamples) {
    const long q = est.n_used / 4;
    const long third = begin + 2 * q;
    const long fourth = begin + 3 * q;
    const double s3 = fit_log_line(errors, third, fourth).slope;
    const double s4 = fit_log_line(errors, fourth, cut).slope;
    if (s3 < 0.0) {
      est.slope_ratio = s4 < 0.0 ? s3 / s4 : std::numeric_limits<double>::infinity();
      drifting = est.slope_ratio > kMaxSlopeRatio;
    }
  }

  std::ostringstream note;
  if (est.r >= 1.0) note << "fitted ratio is not below 1; ";
  if (est.fit_quality < kMinFitQuality) note << "log-linear fit quality below 0.9; ";
  if (drifting) note << "log-slope flattens across the window; ";
  est.note = note.str();
  est.r_linear = est.r < 1.0 && est.fit_quality >= kMinFitQuality && !drifting;
  if (!est.r_linear) est.note = "not R-linear: " + est.note;
  return est;
}

Vector fixed_point_oracle(const OperatorFamily& family, double gamma, const Vector& x0, double tol,
                          long max_iters) {
  if (x0.size() != family.dim()) throw DimensionMismatch("oracle start has wrong dimension");
  Vector x = x0;
  double res = std::numeric_limits<double>::infinity();
  for (long k = 0; k <= max_iters; ++k) {
    Vector tx = family.apply(gamma, x);
    res = (x - tx).norm();
    if (!std::isfinite(res)) break;
    if (res <= tol * (1.0 + x.norm())) {
      // Slow contractions leave an error of res / (1 - rate) at the stopping test; polish
      // while the residual keeps shrinking so distances measured against x sit at rounding level.
      for (int extra = 0; extra < 10000 && res > 0.0; ++extra) {
        Vector nx = family.apply(gamma, tx);
        const double nres = (tx - nx).norm();
        if (!(nres < res)) break;
        x = std::move(tx);
        tx = std::move(nx);
        res = nres;
      }
      return tx;
    }
    x = std::move(tx);
  }
  std::ostringstream msg;
  msg << "fixed-point iteration at gamma = " << gamma << " stopped with residual " << res;
  throw NoConvergence(msg.str());
}

FixedPointCache::FixedPointCache(const OperatorFamily& family, Vector start)
    : family_(family), start_(std::move(start)) {}

const Vector& FixedPointCache::at(double gamma) {
  const double key = round_key(gamma);
  auto it = points_.find(key);
  if (it != points_.end()) return it->second;
  const Vector* warm = &start_;
  if (!points_.empty()) {
    auto hi = points_.lower_bound(key);
    if (hi == points_.end()) {
      warm = &std::prev(hi)->second;
    } else if (hi == points_.begin()) {
      warm = &hi->second;
    } else {
      auto lo = std::prev(hi);
      warm = (key - lo->first <= hi->first - key) ? &lo->second : &hi->second;
    }
  }
  Vector x = fixed_point_oracle(family_, key, *warm);
  return points_.emplace(key, std::move(x)).first->second;
}

void attach_distances(const OperatorFamily& family, IterateTrace& trace, FixedPointCache& cache) {
  if (!family.singleton_fix()) {
    throw NonSingletonFix(family.name() + " carries no contraction certificate; distances are not exact");
  }
  for (auto& row : trace.rows) row.dist_to_fix = (row.x - cache.at(row.gamma)).norm();
}

void attach_limit_errors(IterateTrace& trace, const Vector& limit) {
  for (auto& row : trace.rows) row.err_to_limit = (row.x - limit).norm();
}

SampleBox SampleBox::around(const Vector& center, double radius) {
  return SampleBox{center.array() - radius, center.array() + radius};
}

BoundReport verify_error_bound(const OperatorFamily& family, double gamma, double kappa,
                               const SampleBox& box, int samples, std::uint64_t seed) {
  if (!family.singleton_fix()) {
    throw NonSingletonFix(family.name() + " carries no contraction certificate; distances are not exact");
  }
  if (box.lower.size() != family.dim() || box.upper.size() != family.dim()) {
    throw DimensionMismatch("sample box has wrong dimension");
  }
  if (!(kappa > 0.0)) throw DomainError("kappa must be positive");

  const Vector fixed = fixed_point_oracle(family, gamma, 0.5 * (box.lower + box.upper));
  BoundReport report;
  report.bound_name = "error_bound";
  report.certified_constant = kappa;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 0; s < samples; ++s) {
    Vector x(family.dim());
    for (Index j = 0; j < x.size(); ++j) {
      x(j) = box.lower(j) + (box.upper(j) - box.lower(j)) * unit(rng);
    }
    const double dist = (x - fixed).norm();
    const double res = fixed_point_residual(family, gamma, x);
    const double allowed = kappa * res;
    if (dist > allowed + 1e-9 * (1.0 + x.norm())) ++report.violations;
    if (allowed > 0.0) report.worst_ratio = std::max(report.worst_ratio, dist / allowed);
    ++report.samples;
  }
  return report;
}

BoundReport verify_one_step_contraction(const OperatorFamily& family, const IterateTrace& trace,
                                        double kappa) {
  const auto alpha = family.effective_averagedness();
  if (!alpha) throw DomainError(family.name() + " has no averagedness constant");
  if (!(kappa > 0.0)) throw DomainError("kappa must be positive");
  for (const auto& row : trace.rows) {
    if (!row.dist_to_fix) throw MissingDistances("trace row " + std::to_string(row.n) + " has no distance");
  }
  const double a = *alpha;
  const double factor = std::sqrt(std::max(0.0, 1.0 - (1.0 - a) / (a * kappa * kappa)));

  BoundReport report;
  report.bound_name = "one_step";
  report.certified_constant = factor;
  for (std::size_t i = 0; i + 1 < trace.rows.size(); ++i) {
    const auto& cur = trace.rows[i];
    const auto& nxt = trace.rows[i + 1];
    const double ell = family.relocator_lipschitz(nxt.gamma, cur.gamma);
    const double allowed = ell * factor * *cur.dist_to_fix;
    if (*nxt.dist_to_fix > allowed + 1e-9) ++report.violations;
    if (allowed > 0.0) report.worst_ratio = std::max(report.worst_ratio, *nxt.dist_to_fix / allowed);
    ++report.samples;
  }
  return report;
}

RateTheoremReport verify_rate_theorem(const OperatorFamily& family, const StepsizeSchedule& schedule,
                                      const Vector& x0, long n_steps) {
  RateTheoremReport report;
  const IterateTrace extended = relocated_iterate(family, schedule, x0, 4 * n_steps);
  report.limit = Vector::Zero(x0.size());
  const std::size_t m = extended.rows.size();
  for (std::size_t i = m - 5; i < m; ++i) report.limit += extended.rows[i].x;
  report.limit /= 5.0;

  report.trace.rows.assign(extended.rows.begin(), extended.rows.begin() + n_steps + 1);
  attach_limit_errors(report.trace, report.limit);
  FixedPointCache cache(family, report.limit);
  attach_distances(family, report.trace, cache);

  std::vector<double> dist, err;
  for (const auto& row : report.trace.rows) {
    dist.push_back(*row.dist_to_fix);
    err.push_back(*row.err_to_limit);
  }
  // Errors against an estimated limit bottom out near rounding of the limit.
  const double floor = std::max(kRateFloor, 1e-12 * std::max(1.0, report.limit.norm()));
  report.dist_rate = fit_linear_rate(dist, std::nullopt, floor);
  report.iterate_rate = fit_linear_rate(err, std::nullopt, floor);
  report.pass = report.dist_rate.r_linear && report.iterate_rate.r_linear &&
                report.dist_rate.fit_quality >= kMinFitQuality &&
                report.iterate_rate.fit_quality >= kMinFitQuality;
  return report;
}

double RelocatorLawReport::worst() const {
  return std::max({identity_error, composition_error, round_trip_error, target_residual, source_residual});
}

RelocatorLawReport check_relocator_laws(const OperatorFamily& family, const Vector& start, int n_triples,
                                        std::uint64_t seed) {
  const Interval iv = family.gamma_interval();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pick(iv.low, iv.high);
  FixedPointCache cache(family, start);
  RelocatorLawReport report;
  for (int k = 0; k < n_triples; ++k) {
    const double g = pick(rng);
    const double d = pick(rng);
    const double e = pick(rng);
    const Vector x = cache.at(g);
    const double g_used = round_key(g);
    const Vector to_d = family.relocate(d, g_used, x);
    report.source_residual = std::max(report.source_residual, fixed_point_residual(family, g_used, x));
    report.identity_error = std::max(report.identity_error, (family.relocate(g_used, g_used, x) - x).norm());
    report.composition_error = std::max(
        report.composition_error, (family.relocate(e, d, to_d) - family.relocate(e, g_used, x)).norm());
    report.round_trip_error = std::max(report.round_trip_error, (family.relocate(g_used, d, to_d) - x).norm());
    report.target_residual = std::max(report.target_residual, fixed_point_residual(family, d, to_d));
    ++report.samples;
  }
  return report;
}

double sample_lipschitz_ratio(const OperatorFamily& family, double gamma, int pairs, std::uint64_t seed,
                              double radius) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Index n = family.dim();
  double worst = 0.0;
  for (int p = 0; p < pairs; ++p) {
    Vector x(n), y(n);
    for (Index j = 0; j < n; ++j) x(j) = radius * normal(rng);
    for (Index j = 0; j < n; ++j) y(j) = radius * normal(rng);
    const double den = (x - y).norm();
    if (den == 0.0) continue;
    worst = std::max(worst, (family.apply(gamma, x) - family.apply(gamma, y)).norm() / den);
  }
  return worst;
}

}  // namespace relocsplit
