// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Reference values come from dense linear algebra in support.hpp.

#include "relocsplit/diagnostics.hpp"
#include "relocsplit/dr.hpp"
#include "relocsplit/mt.hpp"
#include "relocsplit/problem.hpp"
#include "support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace relocsplit;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

struct AffineData {
  std::vector<oracle::Mat> ms;
  std::vector<oracle::Vec> bs;
  std::vector<OperatorPtr> ops;
};

AffineData symmetric_tuple(Index n_ops, Index d, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  AffineData a;
  for (Index i = 0; i < n_ops; ++i) {
    a.ms.push_back(oracle::spd(d, lo, hi, rng));
    a.bs.push_back(oracle::normal_vector(d, rng));
    a.ops.push_back(make_affine(a.ms.back(), a.bs.back()));
  }
  return a;
}

std::vector<double> norms_to(const std::vector<Vector>& seq, const Vector& target) {
  std::vector<double> out;
  for (const auto& v : seq) out.push_back((v - target).norm());
  return out;
}

const Interval kInterval{0.5, 2.0};

// 1. Scalar counterexample.
void criterion1(Outcome& o) {
  const ScalarShiftFamily fam(0.5, kInterval);
  const std::vector<StepsizeSchedule> schedules{
      StepsizeSchedule::geometric(1.0, 1.0, 0.5, kInterval), StepsizeSchedule::geometric(1.2, 0.7, 0.9, kInterval),
      StepsizeSchedule::polynomial(1.0, 1.0, 2.0, kInterval), StepsizeSchedule::constant(1.7, kInterval)};
  std::int64_t worst_ulp = 0;
  std::vector<double> geo_err, poly_err;
  for (std::size_t s = 0; s < schedules.size(); ++s) {
    const auto& sched = schedules[s];
    const IterateTrace tr = relocated_iterate(fam, sched, Vector::Constant(1, sched.at(0)), 10000);
    for (const auto& row : tr.rows) {
      worst_ulp = std::max(worst_ulp, oracle::ulp_distance(row.x(0), sched.at(row.n)));
      if (s == 0) geo_err.push_back(std::abs(row.x(0) - 1.0));
      if (s == 2) poly_err.push_back(std::abs(row.x(0) - 1.0));
    }
  }
  const RateEstimate geo = fit_linear_rate(geo_err);
  const RateEstimate poly = fit_linear_rate(poly_err);
  o.detail << "max ulp " << worst_ulp << ", geometric r " << geo.r << ", polynomial " << poly.note;
  o.require(worst_ulp <= 2, "x_n = gamma_n to 2 ulp");
  o.require(std::abs(geo.r - 0.5) <= 0.01, "geometric rate 0.5 +- 0.01");
  o.require(!poly.r_linear, "polynomial flagged not R-linear");
}

// 2. Relocator laws for both families.
void criterion2(Outcome& o) {
  const AffineData dr_data = symmetric_tuple(2, 5, 0.5, 2.0, 201);
  const DRFamily dr(dr_data.ops[0], dr_data.ops[1], kInterval);
  const AffineData mt_data = symmetric_tuple(3, 3, 0.5, 2.0, 202);
  const MTFamily mt(mt_data.ops, 0.5, kInterval);

  const RelocatorLawReport a = check_relocator_laws(dr, Vector::Zero(dr.dim()), 100, 1);
  const RelocatorLawReport b = check_relocator_laws(mt, Vector::Zero(mt.dim()), 100, 2);

  // Cross-check against closed-form fixed points.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> step(kInterval.low, kInterval.high);
  double closed_form = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double g = step(rng), d = step(rng);
    const oracle::Vec xg = oracle::dr_fixed_point(dr_data.ms[0], dr_data.bs[0], dr_data.ms[1], dr_data.bs[1], g);
    const oracle::Vec xd = oracle::dr_fixed_point(dr_data.ms[0], dr_data.bs[0], dr_data.ms[1], dr_data.bs[1], d);
    closed_form = std::max(closed_form, (dr.relocate(d, g, xg) - xd).norm());
    const oracle::Vec yg = oracle::mt_fixed_point(mt_data.ms, mt_data.bs, g);
    const oracle::Vec yd = oracle::mt_fixed_point(mt_data.ms, mt_data.bs, d);
    closed_form = std::max(closed_form, (mt.relocate(d, g, yg) - yd).norm());
  }
  o.detail << "DR worst " << a.worst() << ", MT worst " << b.worst() << ", closed-form gap " << closed_form;
  o.require(a.samples == 100 && b.samples == 100, "100 triples each");
  o.require(a.worst() <= 1e-8, "DR laws");
  o.require(b.worst() <= 1e-8, "MT laws");
  o.require(closed_form <= 1e-8, "relocated closed-form fixed points");
}

// 3. DR relocator displacement identity.
void criterion3(Outcome& o) {
  const AffineData data = symmetric_tuple(2, 6, 0.2, 3.0, 301);
  const DRFamily fam(data.ops[0], data.ops[1], kInterval);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> step(kInterval.low, kInterval.high);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double g = step(rng), d = step(rng);
    const oracle::Vec x = oracle::normal_vector(6, rng, 3.0);
    const oracle::Vec j = oracle::resolvent(data.ms[0], data.bs[0], g, x);
    const double lhs = (fam.relocate(d, g, x) - x).norm();
    const double rhs = std::abs(d - g) * (x - j).norm() / g;
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, rhs));
  }
  o.detail << "worst gap " << worst;
  o.require(worst <= 1e-12, "equality to 1e-12");
}

// 4. Contraction factor.
void criterion4(Outcome& o) {
  const double radicand = 2 + 2 + 1 + 2 * (1 - 0.25 - 0.5) * 2;
  const double by_hand = (std::sqrt(radicand) + 1) / 4;
  const double beta = dr_contraction_factor(1.0, 1.0, 1.0);
  o.detail << "beta(1,1,1) " << beta << " vs " << by_hand;
  o.require(std::abs(beta - by_hand) <= 1e-12, "closed form");
  o.require(std::abs(beta - 0.8624) <= 5e-5, "value near 0.8624");

  // A1 monotone with Lipschitz constant 1, A2 1-strongly monotone.
  std::mt19937_64 rng(401);
  const oracle::Mat m1 = oracle::spd(4, 0.0, 1.0, rng), m2 = oracle::spd(4, 1.0, 3.0, rng);
  const DRFamily fam(make_affine(m1, oracle::normal_vector(4, rng)), make_affine(m2, oracle::normal_vector(4, rng)),
                     kInterval);
  double worst_excess = -1.0;
  for (double g : {0.5, 0.875, 1.25, 1.625, 2.0}) {
    const double ratio = sample_lipschitz_ratio(fam, g, 1000, 5);
    worst_excess = std::max(worst_excess, ratio - dr_contraction_factor(g, 1.0, 1.0));
  }
  o.detail << ", worst sampled excess " << worst_excess;
  o.require(worst_excess <= 1e-9, "sampled ratios below beta_gamma + 1e-9");
}

// 5. Error bounds.
void criterion5(Outcome& o) {
  const ScalarShiftFamily scalar(0.6, kInterval);
  const BoundReport s = verify_error_bound(scalar, 1.3, 1.0 / (1.0 - 0.6),
                                           SampleBox::around(Vector::Constant(1, 1.3), 5.0), 1000, 6);

  const AffineData data = symmetric_tuple(2, 5, 0.5, 2.0, 501);
  const DRFamily fam(data.ops[0], data.ops[1], kInterval);
  const double beta = *fam.contraction_factor();
  Eigen::SelfAdjointEigenSolver<oracle::Mat> es(data.ms[0]);
  const double mu = es.eigenvalues()(0), rho = 1.0 / es.eigenvalues()(es.eigenvalues().size() - 1);
  int contraction_violations = s.violations, dr_violations = 0, negative = 0;
  for (double g : {0.5, 1.0, 2.0}) {
    const SampleBox box = SampleBox::around(
        oracle::dr_fixed_point(data.ms[0], data.bs[0], data.ms[1], data.bs[1], g), 3.0);
    contraction_violations += verify_error_bound(fam, g, 1.0 / (1.0 - beta), box, 1000, 7).violations;
    dr_violations += verify_error_bound(fam, g, 4 * (1 + std::max(1 / (g * mu), g / rho)), box, 1000, 8).violations;
    negative += verify_error_bound(fam, g, 0.01, box, 1000, 9).violations;
  }
  o.detail << "contraction violations " << contraction_violations << ", DR kappa violations " << dr_violations
           << ", negative control violations " << negative;
  o.require(contraction_violations == 0, "kappa = 1/(1-beta)");
  o.require(dr_violations == 0, "DR kappa_gamma");
  o.require(negative >= 1, "negative control");
}

// 6. Main rate theorem on a dim-10 pair.
void criterion6(Outcome& o) {
  ProblemSpec spec;
  spec.dim = 10;
  spec.seed = 7;
  spec.mu_target = 1.0;
  spec.lipschitz_target = 2.0;
  const auto ops = generate_problem(spec);
  const DRFamily fam(ops[0], ops[1], kInterval);
  const auto sched = StepsizeSchedule::geometric(1.0, 1.0, 0.5, kInterval);
  const double beta_bar =
      dr_uniform_contraction_factor(kInterval, ops[1]->strong_monotonicity(), ops[0]->lipschitz());
  const RateTheoremReport rep = verify_rate_theorem(fam, sched, Vector::Zero(10), 300);

  // DR regularity constant, worst case over the interval endpoints.
  const RegularityModuli mod = dr_default_moduli(fam);
  const double kappa = std::max(dr_regularity_constant(kInterval.low, mod.mu, mod.rho),
                                dr_regularity_constant(kInterval.high, mod.mu, mod.rho));
  const BoundReport step = verify_one_step_contraction(fam, rep.trace, kappa);
  const double final_residual = rep.trace.back().residual;

  o.detail << "r " << rep.iterate_rate.r << " (bound " << std::max(beta_bar, 0.5) + 0.05 << "), R^2 "
           << rep.iterate_rate.fit_quality << ", final residual " << final_residual << ", one-step violations "
           << step.violations;
  o.require(rep.iterate_rate.r_linear, "iterate errors R-linear");
  o.require(rep.iterate_rate.r <= std::max(beta_bar, 0.5) + 0.05, "rate bound");
  o.require(rep.iterate_rate.fit_quality >= 0.95, "fit quality");
  o.require(final_residual <= 1e-10, "residual within 300 steps");
  o.require(step.pass(), "one-step inequality");
}

// 7. Primal/dual recovery.
void criterion7(Outcome& o) {
  const AffineData data = symmetric_tuple(2, 6, 0.5, 2.0, 701);
  const DRFamily fam(data.ops[0], data.ops[1], kInterval);
  const auto sched = StepsizeSchedule::geometric(1.0, 1.0, 0.5, kInterval);
  const PrimalDualSequences pd = primal_dual_extract(algorithm1_run(fam, sched, Vector::Zero(6), 300));
  const oracle::Vec zs = oracle::affine_zero(data.ms, data.bs);
  const oracle::Vec gs = data.ms[0] * zs + data.bs[0];

  const oracle::Vec z = pd.z.back();
  const double primal = ((data.ms[0] + data.ms[1]) * z + data.bs[0] + data.bs[1]).norm();
  const RateEstimate g_rate = fit_linear_rate(norms_to(pd.g, gs), std::nullopt, 1e-12 * (1 + gs.norm()));
  double worst_eq = 0.0;
  for (std::size_t n = 0; n < pd.g.size(); ++n) {
    const double a = (pd.h[n] - gs).norm(), b = (pd.g[n] - gs).norm();
    worst_eq = std::max(worst_eq, std::abs(a - b));
  }
  o.detail << "primal residual " << primal << ", dual rate " << g_rate.r << " (R^2 " << g_rate.fit_quality
           << "), |h - g| norm gap " << worst_eq;
  o.require(primal <= 1e-8, "primal residual");
  o.require(g_rate.r_linear, "dual sequence R-linear");
  o.require(worst_eq <= 1e-12, "norm equality");
}

// 8. Fix-set decomposition in both directions.
void criterion8(Outcome& o) {
  const AffineData data = symmetric_tuple(2, 5, 0.5, 2.0, 801);
  const DRFamily fam(data.ops[0], data.ops[1], kInterval);
  const oracle::Vec zs = oracle::affine_zero(data.ms, data.bs);
  const oracle::Vec gs = data.ms[0] * zs + data.bs[0];
  o.require(gs.norm() >= 1e-3, "nonzero dual solution");

  const double ga = 0.7, gb = 1.6;
  double forward = 0.0, converse = 0.0;
  std::vector<Vector> fixed;
  for (double g : {ga, gb}) {
    const Vector x = fixed_point_oracle(fam, g, Vector::Zero(5));
    fixed.push_back(x);
    const FixDecomposition d = fix_decomposition_check(fam, g, x);
    forward = std::max({forward, d.primal_residual, d.dual_residual, d.reconstruction_error,
                        (d.z - zs).norm(), (d.g - gs).norm()});
    converse = std::max(converse, fixed_point_residual(fam, g, zs + g * gs));
  }
  const double separation = (fixed[0] - fixed[1]).norm();
  const double mapped = std::max((fam.relocate(gb, ga, fixed[0]) - fixed[1]).norm(),
                                 (fam.relocate(ga, gb, fixed[1]) - fixed[0]).norm());
  o.detail << "forward " << forward << ", converse " << converse << ", separation " << separation
           << ", relocation gap " << mapped;
  o.require(forward <= 1e-8, "fixed point splits into primal + gamma dual");
  o.require(converse <= 1e-8, "primal + gamma dual is fixed");
  o.require(separation >= 1e-3, "fixed points differ");
  o.require(mapped <= 1e-8, "relocators map one to the other");
}

// 9. MT correctness on N = 3.
void criterion9(Outcome& o) {
  std::mt19937_64 rng(901);
  AffineData data;
  for (int i = 0; i < 3; ++i) {
    // Two strongly monotone operators then a merely monotone one.
    oracle::Mat m = i < 2 ? oracle::spd(4, 1.0, 2.0, rng)
                          : oracle::Mat(oracle::spd(4, 0.0, 1.0, rng) + oracle::skew(4, 0.5, rng));
    data.ms.push_back(m);
    data.bs.push_back(oracle::normal_vector(4, rng));
    data.ops.push_back(make_affine(m, data.bs.back()));
  }
  const MTFamily fam(data.ops, 0.5, kInterval);
  const auto sched = StepsizeSchedule::geometric(1.0, 1.0, 0.5, kInterval);
  const IterateTrace tr = algorithm2_run(fam, sched, Vector::Zero(fam.dim()), 500);

  const oracle::Vec z1 = tr.back().blocks.at("z").head(4);
  oracle::Vec resid = oracle::Vec::Zero(4);
  for (int i = 0; i < 3; ++i) resid += data.ms[static_cast<std::size_t>(i)] * z1 + data.bs[static_cast<std::size_t>(i)];

  std::vector<double> gaps;
  for (const auto& row : tr.rows) gaps.push_back(consensus_gap(row.blocks.at("z"), 3, 4));
  const RateEstimate gap_rate = fit_linear_rate(gaps, std::nullopt, 1e-13);
  const MTZero zr = mt_fixed_point_to_zero(fam, tr.back().gamma, tr.back().x);

  o.detail << "sum residual " << resid.norm() << ", consensus rate " << gap_rate.r << " (R^2 "
           << gap_rate.fit_quality << "), chain residual " << zr.chain_residual;
  o.require(resid.norm() <= 1e-8, "sum residual within 500 steps");
  o.require(gap_rate.r_linear && gap_rate.fit_quality >= 0.9, "consensus gap R-linear");
  o.require(zr.chain_residual <= 1e-7, "chain residuals");
  o.require((zr.z - oracle::affine_zero(data.ms, data.bs)).norm() <= 1e-7, "zero matches linear solve");
}

// 10. MT relocator constants.
void criterion10(Outcome& o) {
  bool identity_exact = true, ordering = true;
  double worst_excess = -1.0;
  for (Index n : {2, 3, 5}) {
    const AffineData data = symmetric_tuple(n, 2, 0.5, 2.0, 1000 + static_cast<std::uint64_t>(n));
    const MTFamily fam(data.ops, 0.5, kInterval);
    std::mt19937_64 rng(11 + static_cast<std::uint64_t>(n));
    for (int i = 0; i < 100; ++i) {
      const double d = kInterval.low + (kInterval.high - kInterval.low) * i / 99.0;
      const auto same = mt_relocator_lipschitz(d, d, n);
      identity_exact = identity_exact && same.l_check == 1.0 && same.l_hat == 1.0;
      for (int j = 0; j < 100; ++j) {
        const double g = kInterval.low + (kInterval.high - kInterval.low) * j / 99.0;
        const auto c = mt_relocator_lipschitz(d, g, n);
        ordering = ordering && c.l_hat <= c.l_check;
        const oracle::Vec x = oracle::normal_vector(fam.dim(), rng, 3.0);
        const oracle::Vec y = oracle::normal_vector(fam.dim(), rng, 3.0);
        const double ratio = (fam.relocate(d, g, x) - fam.relocate(d, g, y)).norm() / (x - y).norm();
        worst_excess = std::max(worst_excess, ratio - c.l_hat);
      }
    }
  }
  o.detail << "worst sampled ratio minus hat constant " << worst_excess;
  o.require(identity_exact, "both constants exactly 1 at delta = gamma");
  o.require(ordering, "hat <= check on the grid");
  o.require(worst_excess <= 1e-9, "sampled ratios below the hat constant");
}

// 11. Summability.
void criterion11(Outcome& o) {
  const Interval unit_low{1.0, 2.0};
  const AffineData data = symmetric_tuple(3, 2, 0.5, 2.0, 1101);
  const DRFamily dr(data.ops[0], data.ops[1], unit_low);
  const MTFamily mt(data.ops, 0.5, unit_low);

  bool dr_ok = true, mt_ok = true;
  std::ostringstream sums;
  for (const auto& [c, r] : std::vector<std::pair<double, double>>{{1.0, 0.5}, {0.5, 0.8}, {1.0, 0.95}}) {
    const auto sched = StepsizeSchedule::geometric(1.0, c, r, unit_low);
    const auto a = summability_report(dr, sched, 20000);
    const auto b = summability_report(mt, sched, 20000);
    const double dr_bound = c * (1 + r) / (1 - r);
    const double mt_bound = mt_summability_bound(sched, 3);
    dr_ok = dr_ok && a.converged && a.partial_sums.back() <= dr_bound;
    mt_ok = mt_ok && b.converged && b.partial_sums.back() <= mt_bound;
    sums << " (C=" << c << ", r=" << r << ": DR " << a.partial_sums.back() << "/" << dr_bound << ", MT "
         << b.partial_sums.back() << "/" << mt_bound << ")";
  }
  const auto poly = StepsizeSchedule::polynomial(1.0, 1.0, 0.4, unit_low);
  const auto p = summability_report(mt, poly, 100000);
  o.detail << "partial sums" << sums.str() << "; polynomial p=0.4 sum " << p.partial_sums.back();
  o.require(dr_ok, "DR sums converge under the bound");
  o.require(mt_ok, "MT sums converge under the bound");
  o.require(!p.converged, "polynomial p = 0.4 flagged");
}

// 12. Relocator-only sequences.
void criterion12(Outcome& o) {
  const auto sched = StepsizeSchedule::geometric(1.0, 1.0, 0.5, kInterval);
  const AffineData dr_data = symmetric_tuple(2, 4, 0.5, 2.0, 1201);
  const DRFamily dr(dr_data.ops[0], dr_data.ops[1], kInterval);
  const AffineData mt_data = symmetric_tuple(3, 3, 0.5, 2.0, 1202);
  const MTFamily mt(mt_data.ops, 0.5, kInterval);

  double worst_residual = 0.0, worst_rate = 0.0;
  bool linear = true;
  const auto run = [&](const OperatorFamily& fam, const Vector& c0, const Vector& limit) {
    const IterateTrace tr = relocator_only_sequence(fam, sched, c0, 100);
    std::vector<double> err;
    for (const auto& row : tr.rows) {
      worst_residual = std::max(worst_residual, fixed_point_residual(fam, row.gamma, row.x));
      err.push_back((row.x - limit).norm());
    }
    const RateEstimate est = fit_linear_rate(err, std::nullopt, 1e-12 * (1 + limit.norm()));
    linear = linear && est.r_linear;
    worst_rate = std::max(worst_rate, est.r);
  };
  const double g0 = sched.at(0);
  run(dr, oracle::dr_fixed_point(dr_data.ms[0], dr_data.bs[0], dr_data.ms[1], dr_data.bs[1], g0),
      oracle::dr_fixed_point(dr_data.ms[0], dr_data.bs[0], dr_data.ms[1], dr_data.bs[1], 1.0));
  run(mt, oracle::mt_fixed_point(mt_data.ms, mt_data.bs, g0), oracle::mt_fixed_point(mt_data.ms, mt_data.bs, 1.0));
  o.detail << "worst residual " << worst_residual << ", worst rate " << worst_rate;
  o.require(worst_residual <= 1e-7, "stays on the fixed sets");
  o.require(linear && worst_rate <= 0.5 + 0.05, "rate at most r + 0.05");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"scalar counterexample follows the schedule exactly", criterion1},
      {"relocator laws on fixed points (DR and MT)", criterion2},
      {"DR relocator displacement identity", criterion3},
      {"DR contraction factor", criterion4},
      {"error bounds and negative control", criterion5},
      {"relocated DR rate theorem (dim 10)", criterion6},
      {"primal/dual recovery", criterion7},
      {"fixed-set decomposition", criterion8},
      {"MT correctness (N = 3)", criterion9},
      {"MT relocator constants", criterion10},
      {"summability of relocator constants", criterion11},
      {"relocator-only sequence", criterion12},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs >= 10.0) {
      o.pass = false;
      o.detail << " [took " << secs << " s]";
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %zu: %s -- %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.str().c_str(), secs);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
