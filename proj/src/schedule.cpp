#include "relocsplit/schedule.hpp"

#include "relocsplit/errors.hpp"

#include <cmath>

namespace relocsplit {

void Interval::validate() const {
  if (!(low > 0.0) || !(high >= low) || !std::isfinite(high)) {
    throw DomainError("stepsize interval must satisfy 0 < low <= high < inf");
  }
}

std::string to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::kConstant: return "constant";
    case ScheduleKind::kGeometric: return "geometric";
    case ScheduleKind::kPolynomial: return "polynomial";
  }
  return "unknown";
}

ScheduleKind schedule_kind_from_string(const std::string& name) {
  if (name == "constant") return ScheduleKind::kConstant;
  if (name == "geometric") return ScheduleKind::kGeometric;
  if (name == "polynomial") return ScheduleKind::kPolynomial;
  throw ConfigError("unknown schedule kind '" + name + "'");
}

StepsizeSchedule::StepsizeSchedule(ScheduleKind kind, double gamma_star, double scale, double ratio,
                                   double power, Interval interval)
    : kind_(kind),
      gamma_star_(gamma_star),
      scale_(scale),
      ratio_(ratio),
      power_(power),
      interval_(interval) {
  interval_.validate();
  if (!interval_.contains(gamma_star_)) {
    throw DomainError("gamma* must lie in the stepsize interval");
  }
  if (!(scale_ >= 0.0) || !std::isfinite(scale_)) throw DomainError("schedule scale C must be >= 0");
}

StepsizeSchedule StepsizeSchedule::constant(double gamma, Interval interval) {
  return StepsizeSchedule(ScheduleKind::kConstant, gamma, 0.0, 0.0, 0.0, interval);
}

StepsizeSchedule StepsizeSchedule::geometric(double gamma_star, double scale, double ratio,
                                             Interval interval) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw DomainError("geometric ratio r must lie in (0,1)");
  return StepsizeSchedule(ScheduleKind::kGeometric, gamma_star, scale, ratio, 0.0, interval);
}

StepsizeSchedule StepsizeSchedule::polynomial(double gamma_star, double scale, double power,
                                              Interval interval) {
  if (!(power > 0.0)) throw DomainError("polynomial power p must be positive");
  return StepsizeSchedule(ScheduleKind::kPolynomial, gamma_star, scale, 0.0, power, interval);
}

double StepsizeSchedule::at(long n) const {
  if (n < 0) throw DomainError("schedule index must be nonnegative");
  switch (kind_) {
    case ScheduleKind::kConstant:
      return gamma_star_;
    case ScheduleKind::kGeometric:
      return interval_.clamp(gamma_star_ + scale_ * std::pow(ratio_, static_cast<double>(n)));
    case ScheduleKind::kPolynomial:
      return interval_.clamp(gamma_star_ +
                             scale_ / std::pow(static_cast<double>(n) + 1.0, power_));
  }
  return gamma_star_;
}

std::vector<double> StepsizeSchedule::take(long count) const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count > 0 ? count : 0));
  for (long n = 0; n < count; ++n) out.push_back(at(n));
  return out;
}

}  // namespace relocsplit
