#pragma once

#include "relocsplit/family.hpp"

#include <optional>
#include <vector>

namespace relocsplit {

/// Douglas-Rachford operators for 0 in (A1 + A2)x:
///   T_gamma x = x - J_{gamma A1} x + J_{gamma A2}(2 J_{gamma A1} x - x),
/// relocated by Q_{delta <- gamma} x = (delta/gamma) x + (1 - delta/gamma) J_{gamma A1} x.
///
/// Every T_gamma is 1/2-averaged. When A1 is single-valued (monotone,
/// Lipschitz) and A2 is strongly monotone the family also carries the
/// contraction marker beta = max over the interval of beta_gamma.
class DRFamily final : public OperatorFamily {
 public:
  DRFamily(OperatorPtr a1, OperatorPtr a2, Interval interval);

  std::string name() const override { return "douglas_rachford"; }
  Index dim() const override { return a1_->dim(); }
  Interval gamma_interval() const override { return interval_; }
  Vector apply(double gamma, const Vector& x) const override;
  Vector relocate(double delta, double gamma, const Vector& x) const override;
  /// max{1, delta/gamma}.
  double relocator_lipschitz(double delta, double gamma) const override;
  std::optional<double> averagedness() const override { return 0.5; }
  std::optional<double> contraction_factor() const override { return beta_; }

  const MonotoneOperator& a1() const { return *a1_; }
  const MonotoneOperator& a2() const { return *a2_; }
  const OperatorPtr& a1_ptr() const { return a1_; }
  const OperatorPtr& a2_ptr() const { return a2_; }

 private:
  OperatorPtr a1_;
  OperatorPtr a2_;
  Interval interval_;
  std::optional<double> beta_;
};

Vector dr_apply(const DRFamily& fam, double gamma, const Vector& x);
Vector dr_relocate(const DRFamily& fam, double delta, double gamma, const Vector& x);

/// Relocated Douglas-Rachford with the (z, y, w) bookkeeping:
///   z_0 = J_{g0 A1} x_0
///   y_n = J_{gn A2}(2 z_n - x_n),  w_n = x_n - z_n + y_n
///   z_{n+1} = J_{gn A1} w_n,  x_{n+1} = (g_{n+1}/g_n) w_n + (1 - g_{n+1}/g_n) z_{n+1}
/// Rows 0..n_steps carry blocks "z", "y", "w"; t_of_x is w_n.
IterateTrace algorithm1_run(const DRFamily& fam, const StepsizeSchedule& schedule,
                            const Vector& x0, long n_steps);

struct PrimalDualSequences {
  std::vector<Vector> z;
  std::vector<Vector> y;
  /// g_n = (x_n - z_n) / gamma_n
  std::vector<Vector> g;
  /// h_n = (w_n - y_n) / gamma_n
  std::vector<Vector> h;
};

/// Throws MissingBlocks unless the trace came from algorithm1_run.
PrimalDualSequences primal_dual_extract(const IterateTrace& trace);

/// Contraction factor of T_gamma when A1 is monotone and L-Lipschitz and A2
/// is mu-strongly monotone:
///   beta = (sqrt(2g^2mu^2 + 2g mu + 1 + 2(1 - 1/(1+gL)^2 - 1/(1+g^2L^2)) g mu (1+g mu)) + 1)
///          / (2(1 + g mu)).
/// Throws DomainError unless all arguments are positive.
double dr_contraction_factor(double gamma, double mu, double lipschitz);

/// Largest dr_contraction_factor over a 1000-point grid of the interval plus
/// its endpoints, padded by 1e-6.
double dr_uniform_contraction_factor(const Interval& interval, double mu, double lipschitz);

/// kappa_gamma = 4 (1 + max{1/(gamma mu), gamma/rho}).
double dr_regularity_constant(double gamma, double mu, double rho);

struct RegularityModuli {
  double mu = 0.0;
  double rho = 0.0;
};

/// Default moduli for a symmetric positive definite A1: mu = lambda_min(M1),
/// rho = 1/lambda_max(M1). Throws UnsupportedOperator otherwise.
RegularityModuli dr_default_moduli(const DRFamily& fam);

struct FixDecomposition {
  Vector z;
  Vector g;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  /// True when the dual residual is ||A1^{-1} g - A2^{-1}(-g)||; false when
  /// it fell back to ||z - J_{gamma A2}(2z - x)||.
  bool dual_via_inverse = false;
  double reconstruction_error = 0.0;
};

/// Splits a fixed point x = z + gamma g into primal z = J_{gamma A1} x and
/// dual g = (x - z)/gamma and reports their residuals.
FixDecomposition fix_decomposition_check(const DRFamily& fam, double gamma, const Vector& x_fixed);

/// Upper bound on sum(max{1, g_{n+1}/g_n} - 1) for a geometric schedule:
/// C(1+r) / ((1-r) g_low).
double dr_summability_bound(const StepsizeSchedule& schedule);

/// Direct primal solution of (M1 + M2) z = -(b1 + b2) for an affine pair.
Vector dr_affine_primal_solution(const DRFamily& fam);

}  // namespace relocsplit
