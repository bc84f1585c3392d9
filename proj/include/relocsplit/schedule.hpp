#pragma once

#include <string>
#include <vector>

namespace relocsplit {

/// Closed stepsize interval [low, high] inside (0, inf).
struct Interval {
  double low = 1.0;
  double high = 1.0;

  bool contains(double g, double tol = 0.0) const { return g >= low - tol && g <= high + tol; }
  double clamp(double g) const { return g < low ? low : (g > high ? high : g); }
  /// Throws DomainError unless 0 < low <= high.
  void validate() const;
};

enum class ScheduleKind { kConstant, kGeometric, kPolynomial };

std::string to_string(ScheduleKind kind);
/// Throws ConfigError on an unknown name.
ScheduleKind schedule_kind_from_string(const std::string& name);

/// gamma_n = clamp(gamma* + C r^n) (geometric), clamp(gamma* + C/(n+1)^p)
/// (polynomial) or gamma* (constant).
///
/// Values leaving the interval are clamped rather than rejected, which keeps
/// both interval membership and |gamma_n - gamma*| <= C r^n.
class StepsizeSchedule {
 public:
  static StepsizeSchedule constant(double gamma, Interval interval);
  static StepsizeSchedule geometric(double gamma_star, double scale, double ratio, Interval interval);
  static StepsizeSchedule polynomial(double gamma_star, double scale, double power, Interval interval);

  double at(long n) const;
  std::vector<double> take(long count) const;

  ScheduleKind kind() const { return kind_; }
  double gamma_star() const { return gamma_star_; }
  double scale() const { return scale_; }
  double ratio() const { return ratio_; }
  double power() const { return power_; }
  const Interval& interval() const { return interval_; }

 private:
  StepsizeSchedule(ScheduleKind kind, double gamma_star, double scale, double ratio, double power,
                   Interval interval);

  ScheduleKind kind_;
  double gamma_star_;
  double scale_;
  double ratio_;
  double power_;
  Interval interval_;
};

}  // namespace relocsplit
