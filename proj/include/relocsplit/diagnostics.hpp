#pragma once

#include "relocsplit/family.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace relocsplit {

/// Fitted envelope e_n <= C r^n of an error sequence.
struct RateEstimate {
  double C = 0.0;
  double r = 1.0;
  /// R^2 of the log-linear least-squares fit.
  double fit_quality = 0.0;
  long burn_in = 0;
  long n_used = 0;
  bool r_linear = false;
  /// Slope of log e over the third quarter of the window divided by the
  /// slope over the fourth quarter; stays near 1 for geometric decay.
  double slope_ratio = 1.0;
  std::string note;
};

inline constexpr double kRateFloor = 1e-14;
inline constexpr double kMinFitQuality = 0.9;
/// Quarter-slope ratio above which the decay is treated as sub-geometric.
inline constexpr double kMaxSlopeRatio = 1.25;

/// Least-squares fit of log e_n against n over [burn_in, cut), where cut is
/// the first index with e_n < floor. Default burn-in is max(5, cut/10).
/// Marked not R-linear when r >= 1, R^2 < 0.9, or the log-slope flattens
/// between the last two quarters of the window by more than kMaxSlopeRatio.
/// Throws TooFewSamples with fewer than 20 usable entries.
RateEstimate fit_linear_rate(std::span<const double> errors, std::optional<long> burn_in = std::nullopt,
                             double floor = kRateFloor);

/// Iterates x <- T_gamma x until ||x - T_gamma x|| <= tol (1 + ||x||).
/// Throws NoConvergence with the last residual.
Vector fixed_point_oracle(const OperatorFamily& family, double gamma, const Vector& x0,
                          double tol = 1e-13, long max_iters = 1000000);

/// One oracle fixed point per stepsize, keyed by gamma rounded to 12
/// significant digits. Each new solve starts from the nearest cached point.
class FixedPointCache {
 public:
  FixedPointCache(const OperatorFamily& family, Vector start);

  const Vector& at(double gamma);
  std::size_t size() const { return points_.size(); }

 private:
  const OperatorFamily& family_;
  Vector start_;
  std::map<double, Vector> points_;
};

/// Fills dist_to_fix of every row with ||x_n - x*_{gamma_n}||. Throws
/// NonSingletonFix unless the family carries a contraction certificate.
void attach_distances(const OperatorFamily& family, IterateTrace& trace, FixedPointCache& cache);

/// Fills err_to_limit of every row with ||x_n - limit||.
void attach_limit_errors(IterateTrace& trace, const Vector& limit);

struct BoundReport {
  std::string bound_name;
  int samples = 0;
  int violations = 0;
  double worst_ratio = 0.0;
  double certified_constant = 0.0;

  bool pass() const { return violations == 0; }
};

struct SampleBox {
  Vector lower;
  Vector upper;

  /// center + [-radius, radius]^d.
  static SampleBox around(const Vector& center, double radius);
};

/// ||x - x*_gamma|| <= kappa ||x - T_gamma x|| + 1e-9 (1 + ||x||) on seeded
/// uniform samples of the box. Throws NonSingletonFix without a
/// contraction certificate.
BoundReport verify_error_bound(const OperatorFamily& family, double gamma, double kappa,
                               const SampleBox& box, int samples, std::uint64_t seed);

/// dist_{n+1} <= l_n sqrt(max{0, 1 - (1-alpha)/(alpha kappa^2)}) dist_n + 1e-9
/// along a trace, with l_n = relocator_lipschitz(gamma_{n+1}, gamma_n) and
/// alpha the family's effective averagedness. Throws MissingDistances when a
/// row has no dist_to_fix.
BoundReport verify_one_step_contraction(const OperatorFamily& family, const IterateTrace& trace,
                                        double kappa);

struct RateTheoremReport {
  RateEstimate dist_rate;
  RateEstimate iterate_rate;
  bool pass = false;
  Vector limit;
  /// The requested run with dist_to_fix and err_to_limit attached.
  IterateTrace trace;
};

/// Runs relocated_iterate, estimates the limit as the mean of the last five
/// iterates of a 4x longer run, and fits both distance and iterate errors.
RateTheoremReport verify_rate_theorem(const OperatorFamily& family, const StepsizeSchedule& schedule,
                                      const Vector& x0, long n_steps);

struct RelocatorLawReport {
  int samples = 0;
  /// max ||Q_{g<-g} x - x||
  double identity_error = 0.0;
  /// max ||Q_{e<-d} Q_{d<-g} x - Q_{e<-g} x||
  double composition_error = 0.0;
  /// max ||Q_{g<-d} Q_{d<-g} x - x||
  double round_trip_error = 0.0;
  /// max ||y - T_d y|| over relocated points y = Q_{d<-g} x
  double target_residual = 0.0;
  /// max ||x - T_g x|| over the oracle points themselves
  double source_residual = 0.0;

  double worst() const;
};

/// Samples (gamma, delta, eps) uniformly from the family's interval and
/// checks the relocator laws on oracle fixed points.
RelocatorLawReport check_relocator_laws(const OperatorFamily& family, const Vector& start,
                                        int n_triples, std::uint64_t seed);

/// Largest ||T_gamma x - T_gamma y|| / ||x - y|| over seeded normal pairs of
/// scale `radius`.
double sample_lipschitz_ratio(const OperatorFamily& family, double gamma, int pairs,
                              std::uint64_t seed, double radius = 3.0);

}  // namespace relocsplit
