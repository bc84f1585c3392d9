#pragma once

#include "relocsplit/operators.hpp"
#include "relocsplit/schedule.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace relocsplit {

/// A stepsize-parameterized family (T_gamma) together with its fixed-point
/// relocators Q_{delta <- gamma}.
///
/// Implementations are immutable after construction and may be shared by
/// concurrent runs.
class OperatorFamily {
 public:
  virtual ~OperatorFamily() = default;

  virtual std::string name() const = 0;
  /// Dimension of the iterate space (block count times dim for MT).
  virtual Index dim() const = 0;
  virtual Interval gamma_interval() const = 0;

  virtual Vector apply(double gamma, const Vector& x) const = 0;
  virtual Vector relocate(double delta, double gamma, const Vector& x) const = 0;
  /// Lipschitz constant of relocate(delta, gamma, .); always >= 1.
  virtual double relocator_lipschitz(double delta, double gamma) const = 0;

  /// alpha when every T_gamma is known to be alpha-averaged.
  virtual std::optional<double> averagedness() const = 0;
  /// beta when (T_gamma) is a uniform beta-contraction over the interval.
  virtual std::optional<double> contraction_factor() const = 0;

  /// Fix T_gamma is a certified singleton (contraction marker present).
  bool singleton_fix() const { return contraction_factor().has_value(); }

  /// alpha if known, otherwise (beta + 1)/2 from the contraction marker.
  std::optional<double> effective_averagedness() const;

  /// Uniform linear regularity constant 1/(1 - beta) of a contraction family.
  std::optional<double> certified_kappa() const;
};

/// T_gamma x = gamma + beta (x - gamma) on R, with Q_{delta <- gamma} x = delta.
/// Fix T_gamma = {gamma}, so a relocated run started at gamma_0 follows the
/// schedule exactly.
class ScalarShiftFamily final : public OperatorFamily {
 public:
  ScalarShiftFamily(double beta, Interval interval);

  std::string name() const override { return "scalar_shift"; }
  Index dim() const override { return 1; }
  Interval gamma_interval() const override { return interval_; }
  Vector apply(double gamma, const Vector& x) const override;
  Vector relocate(double delta, double gamma, const Vector& x) const override;
  double relocator_lipschitz(double, double) const override { return 1.0; }
  std::optional<double> averagedness() const override { return std::nullopt; }
  std::optional<double> contraction_factor() const override { return beta_; }

  double beta() const { return beta_; }

 private:
  double beta_;
  Interval interval_;
};

/// One iteration record. `blocks` carries algorithm-specific sequences
/// (z, y, w for Douglas-Rachford; z, w for Malitsky-Tam).
struct TraceRow {
  long n = 0;
  double gamma = 0.0;
  Vector x;
  Vector t_of_x;
  double residual = 0.0;
  std::optional<double> dist_to_fix;
  std::optional<double> err_to_limit;
  std::map<std::string, Vector> blocks;
};

struct IterateTrace {
  std::vector<TraceRow> rows;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
  const TraceRow& back() const { return rows.back(); }
  std::vector<double> residuals() const;
  std::vector<double> gammas() const;
  /// Throws MissingBlocks when any row lacks `name`.
  std::vector<Vector> block(const std::string& name) const;
  /// Throws when rows are not contiguous from n = 0 or a residual is bad.
  void validate() const;
};

/// Iterates whose norm exceeds this are treated as divergence.
inline constexpr double kDivergenceNorm = 1e12;
/// Default fixed-point certification tolerance, scaled by (1 + ||x||).
inline constexpr double kFixedPointTol = 1e-8;

/// ||x - T_gamma x||.
double fixed_point_residual(const OperatorFamily& family, double gamma, const Vector& x);

/// ||x - T_gamma x|| <= tol (1 + ||x||).
bool is_fixed_point(const OperatorFamily& family, double gamma, const Vector& x,
                    double tol = kFixedPointTol);

/// x_{n+1} = Q_{gamma_{n+1} <- gamma_n} T_{gamma_n} x_n for n < n_steps.
/// The trace holds rows 0..n_steps, each with T_{gamma_n} x_n and residual.
IterateTrace relocated_iterate(const OperatorFamily& family, const StepsizeSchedule& schedule,
                               const Vector& x0, long n_steps);

/// c_{n+1} = Q_{gamma_{n+1} <- gamma_n} c_n starting from c0 in Fix T_{gamma_0}.
/// Throws NotAFixedPoint when c0 fails the residual check.
IterateTrace relocator_only_sequence(const OperatorFamily& family,
                                     const StepsizeSchedule& schedule, const Vector& c0,
                                     long n_steps);

struct SummabilityReport {
  std::vector<double> partial_sums;
  bool converged = false;
};

/// Partial sums of L_{gamma_{n+1} <- gamma_n} - 1 over n < n_terms.
/// Converged when the increment over the last 10% of terms is below 1e-10.
SummabilityReport summability_report(const OperatorFamily& family,
                                     const StepsizeSchedule& schedule, long n_terms);

struct GammaLipschitzProbe {
  double l_estimate = 0.0;
  Vector point;
  double gamma = 0.0;
  double delta = 0.0;
};

/// sup ||Q_{delta <- gamma} x - x|| / |delta - gamma| over the given fixed
/// points and target stepsizes (delta == gamma skipped).
GammaLipschitzProbe gamma_lipschitz_probe(const OperatorFamily& family,
                                          const std::vector<std::pair<Vector, double>>& fixed_points,
                                          const std::vector<double>& deltas);

}  // namespace relocsplit
