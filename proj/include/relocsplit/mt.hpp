#pragma once

#include "relocsplit/family.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace relocsplit {

/// Malitsky-Tam resolvent splitting for 0 in (A_1 + ... + A_N)x, N >= 2.
///
/// Iterates live on H^{N-1}: a flat vector of N-1 blocks of length d.
/// With z^1 = J(x^1), z^i = J_{gA_i}(z^{i-1} + x^i - x^{i-1}) for
/// i = 2..N-1 and z^N = J_{gA_N}(z^1 + z^{N-1} - x^{N-1}):
///   T_gamma x = x + theta (z^2 - z^1, ..., z^N - z^{N-1}).
/// The relocator moves every block by the same first-block resolvent:
///   Q^i x = (delta/gamma) x^i + (1 - delta/gamma) J_{gamma A_1} x^1.
class MTFamily final : public OperatorFamily {
 public:
  static constexpr double kThetaMargin = 1e-6;

  /// `contraction` attaches a certified beta (see mt_contraction_certificate).
  MTFamily(std::vector<OperatorPtr> ops, double theta, Interval interval,
           std::optional<double> contraction = std::nullopt);

  std::string name() const override { return "malitsky_tam"; }
  Index dim() const override { return (count() - 1) * op_dim_; }
  Interval gamma_interval() const override { return interval_; }
  Vector apply(double gamma, const Vector& x) const override;
  Vector relocate(double delta, double gamma, const Vector& x) const override;
  /// The exported constant L_check of mt_relocator_lipschitz.
  double relocator_lipschitz(double delta, double gamma) const override;
  std::optional<double> averagedness() const override { return std::nullopt; }
  std::optional<double> contraction_factor() const override { return beta_; }

  Index count() const { return static_cast<Index>(ops_.size()); }
  Index op_dim() const { return op_dim_; }
  double theta() const { return theta_; }
  const std::vector<OperatorPtr>& operators() const { return ops_; }
  const MonotoneOperator& op(Index i) const { return *ops_[static_cast<std::size_t>(i)]; }

  /// Block i (0-based) of a flat block vector.
  auto block(const Vector& x, Index i) const { return x.segment(i * op_dim_, op_dim_); }

 private:
  std::vector<OperatorPtr> ops_;
  Index op_dim_ = 0;
  double theta_;
  Interval interval_;
  std::optional<double> beta_;
};

struct MTEvaluation {
  Vector t_of_x;
  /// z^1 .. z^N.
  std::vector<Vector> z;
};

/// T_gamma x together with the resolvent chain. Throws BadBlockCount when
/// x is not N-1 blocks long.
MTEvaluation mt_evaluate(const MTFamily& fam, double gamma, const Vector& x_blocks);

Vector mt_apply(const MTFamily& fam, double gamma, const Vector& x_blocks);
Vector mt_relocate(const MTFamily& fam, double delta, double gamma, const Vector& x_blocks);

struct MTRelocatorConstants {
  /// sqrt(t) + sqrt(s) max{sqrt(N-1), sqrt(2N) sqrt(t)}, t = delta/gamma, s = |gamma-delta|/gamma
  double l_check = 1.0;
  /// max{sqrt(t + (N-1)s), sqrt(t + 2N t s)}
  double l_hat = 1.0;
};

MTRelocatorConstants mt_relocator_lipschitz(double delta, double gamma, Index n_ops);

/// Relocated Malitsky-Tam:
///   z_0^1 = J_{g0 A1} x_0^1,  w_n = x_n + theta (z_n^2 - z_n^1, ..., z_n^N - z_n^{N-1})
///   z_{n+1}^1 = J_{gn A1} w_n^1
///   x_{n+1}^1 = (g_{n+1}/g_n) w_n^1 + (1 - g_{n+1}/g_n) z_{n+1}^1
///   x_{n+1}^i = (g_{n+1}/g_n)(w_n^i - w_n^1) + x_{n+1}^1
/// Rows carry block "z" (z^1..z^N stacked) and "w"; t_of_x is w_n.
IterateTrace algorithm2_run(const MTFamily& fam, const StepsizeSchedule& schedule,
                            const Vector& x0_blocks, long n_steps);

/// max_{i,j} ||z^i - z^j|| of a stacked z block.
double consensus_gap(const Vector& z_stack, Index n_ops, Index op_dim);

struct MTZero {
  Vector z;
  double inclusion_residual = 0.0;
  /// Largest residual of the chain z = J_{gA_i}(x^i - x^{i-1} + z), z = J_{gA_N}(2z - x^{N-1}).
  double chain_residual = 0.0;
};

/// Recovers z = J_{gamma A1} x^1 from a fixed point. Throws NotAFixedPoint,
/// or ChainMismatch when a chain residual exceeds 1e-7.
MTZero mt_fixed_point_to_zero(const MTFamily& fam, double gamma, const Vector& x_blocks);

enum class MTContractionCase { kLastStrong, kFirstStrong };

struct MTContractionCertificate {
  bool valid = false;
  std::optional<double> beta;
  std::string note;
};

/// Structural check of the chosen case, then beta = largest observed
/// ||T x - T y|| / ||x - y|| over 2000 seeded pairs at 5 stepsizes across the
/// interval. For all-affine families the exact norm of the linear part is
/// folded into the maximum. Valid only when beta < 1 - 1e-6.
MTContractionCertificate mt_contraction_certificate(const MTFamily& fam, MTContractionCase which,
                                                    std::uint64_t seed = 0);

/// Upper bound on sum(L_check - 1) for a geometric schedule:
///   M / (1 - sqrt r),  M = C(1+r)/(2 g_low) + sqrt(C(1+r)/g_low) max{sqrt(N-1), sqrt(2N g_high/g_low)}.
double mt_summability_bound(const StepsizeSchedule& schedule, Index n_ops);

/// Lift a d-vector to N-1 equal blocks.
Vector mt_replicate(const Vector& x, Index n_ops);

}  // namespace relocsplit
