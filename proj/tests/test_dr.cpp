#include "relocsplit/diagnostics.hpp"
#include "relocsplit/dr.hpp"
#include "relocsplit/errors.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace relocsplit;

namespace {

struct AffinePair {
  oracle::Mat m1, m2;
  oracle::Vec b1, b2;
  std::shared_ptr<DRFamily> fam;
};

// A1 symmetric with spectrum [lo1, hi1], A2 symmetric with spectrum [lo2, hi2].
AffinePair make_pair(Index d, double lo1, double hi1, double lo2, double hi2, std::uint64_t seed,
                     Interval iv = {0.5, 2.0}) {
  std::mt19937_64 rng(seed);
  AffinePair p;
  p.m1 = oracle::spd(d, lo1, hi1, rng);
  p.m2 = oracle::spd(d, lo2, hi2, rng);
  p.b1 = oracle::normal_vector(d, rng);
  p.b2 = oracle::normal_vector(d, rng);
  p.fam = std::make_shared<DRFamily>(make_affine(p.m1, p.b1), make_affine(p.m2, p.b2), iv);
  return p;
}

double rel(const Vector& a, const Vector& b) { return (a - b).norm() / (1.0 + b.norm()); }

}  // namespace

TEST_CASE("dr_apply trivial cases") {
  const DRFamily zeros(make_affine(Matrix::Zero(3, 3), Vector::Zero(3)),
                       make_affine(Matrix::Zero(3, 3), Vector::Zero(3)), {0.5, 2.0});
  const Vector x = Vector::LinSpaced(3, -1.0, 2.0);
  CHECK((dr_apply(zeros, 1.3, x) - x).norm() == 0.0);

  const DRFamily boxed(make_affine(Matrix::Zero(2, 2), Vector::Zero(2)),
                       make_box(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0)), {0.5, 2.0});
  const Vector inside = Vector::Constant(2, 0.25);
  CHECK((dr_apply(boxed, 0.9, inside) - inside).norm() == 0.0);
}

TEST_CASE("dr_apply matches the dense formula") {
  const auto p = make_pair(4, 0.5, 2.0, 1.0, 3.0, 1);
  std::mt19937_64 rng(2);
  for (int k = 0; k < 20; ++k) {
    const oracle::Vec x = oracle::normal_vector(4, rng, 3.0);
    const double g = 0.5 + 0.07 * k;
    const oracle::Vec z = oracle::resolvent(p.m1, p.b1, g, x);
    const oracle::Vec y = oracle::resolvent(p.m2, p.b2, g, 2 * z - x);
    CHECK((dr_apply(*p.fam, g, x) - (x - z + y)).norm() <= 1e-12 * (1 + x.norm()));
  }
}

TEST_CASE("dr_relocate trivial cases") {
  const auto p = make_pair(3, 0.5, 2.0, 1.0, 3.0, 4);
  const Vector x = Vector::LinSpaced(3, 1.0, 3.0);
  CHECK((dr_relocate(*p.fam, 1.1, 1.1, x) - x).norm() == 0.0);

  const DRFamily zero_first(make_affine(Matrix::Zero(3, 3), Vector::Zero(3)),
                            make_affine(Matrix::Identity(3, 3), Vector::Zero(3)), {0.5, 2.0});
  for (double delta : {0.5, 0.8, 1.9}) {
    CHECK((dr_relocate(zero_first, delta, 1.0, x) - x).norm() <= 1e-15 * x.norm() * 4);
  }
  CHECK_THROWS_AS(dr_relocate(*p.fam, 0.0, 1.0, x), NonPositiveStepsize);
}

TEST_CASE("relocator displacement equals |delta - gamma| ||x - Jx|| / gamma") {
  const auto p = make_pair(5, 0.3, 2.0, 0.5, 2.5, 5);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> step(0.5, 2.0);
  for (int k = 0; k < 100; ++k) {
    const oracle::Vec x = oracle::normal_vector(5, rng, 2.0);
    const double g = step(rng), d = step(rng);
    const oracle::Vec j = oracle::resolvent(p.m1, p.b1, g, x);
    const double lhs = (dr_relocate(*p.fam, d, g, x) - x).norm();
    const double rhs = std::abs(d - g) * (x - j).norm() / g;
    CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + rhs));
  }
}

TEST_CASE("relocator Lipschitz constant max{1, delta/gamma} bounds sampled ratios") {
  const auto p = make_pair(4, 0.0, 3.0, 0.5, 2.0, 7);
  CHECK(p.fam->relocator_lipschitz(2.0, 1.0) == 2.0);
  CHECK(p.fam->relocator_lipschitz(0.5, 1.0) == 1.0);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> step(0.5, 2.0);
  for (int k = 0; k < 500; ++k) {
    const double g = step(rng), d = step(rng);
    const oracle::Vec x = oracle::normal_vector(4, rng, 3.0);
    const oracle::Vec y = oracle::normal_vector(4, rng, 3.0);
    const double ratio = (p.fam->relocate(d, g, x) - p.fam->relocate(d, g, y)).norm() / (x - y).norm();
    CHECK(ratio <= p.fam->relocator_lipschitz(d, g) + 1e-12);
  }
}

TEST_CASE("oracle fixed points agree with the closed form and relocate onto the target set") {
  const auto p = make_pair(4, 0.5, 2.0, 1.0, 3.0, 9);
  for (double g : {0.5, 1.0, 1.7}) {
    const Vector x = fixed_point_oracle(*p.fam, g, Vector::Zero(4));
    const oracle::Vec expect = oracle::dr_fixed_point(p.m1, p.b1, p.m2, p.b2, g);
    CHECK(rel(x, expect) <= 1e-10);
    for (double d : {0.6, 1.3, 2.0}) {
      const Vector y = p.fam->relocate(d, g, x);
      CHECK(fixed_point_residual(*p.fam, d, y) <= 1e-8);
      CHECK(rel(y, oracle::dr_fixed_point(p.m1, p.b1, p.m2, p.b2, d)) <= 1e-9);
    }
  }
}

TEST_CASE("each T_gamma is firmly nonexpansive (1/2-averaged)") {
  std::mt19937_64 rng(10);
  const oracle::Mat s = oracle::skew(3, 2.0, rng);
  const DRFamily fam(make_affine(s, oracle::normal_vector(3, rng)),
                     make_box(Vector::Constant(3, -0.5), Vector::Constant(3, 1.0)), {0.5, 2.0});
  CHECK(*fam.averagedness() == 0.5);
  CHECK_FALSE(fam.contraction_factor().has_value());
  for (int k = 0; k < 500; ++k) {
    const double g = 0.5 + 1.5 * (k % 10) / 9.0;
    const oracle::Vec x = oracle::normal_vector(3, rng, 3.0);
    const oracle::Vec y = oracle::normal_vector(3, rng, 3.0);
    const Vector tx = fam.apply(g, x), ty = fam.apply(g, y);
    const double lhs = (tx - ty).squaredNorm() + ((x - tx) - (y - ty)).squaredNorm();
    CHECK(lhs <= (x - y).squaredNorm() * (1 + 1e-12) + 1e-12);
  }
}

TEST_CASE("algorithm1_run agrees with the generic relocated driver") {
  const auto p = make_pair(6, 0.5, 2.0, 1.0, 3.0, 11);
  const auto sched = StepsizeSchedule::geometric(1.0, 1.0, 0.5, {0.5, 2.0});
  std::mt19937_64 rng(12);
  const Vector x0 = oracle::normal_vector(6, rng, 5.0);
  const IterateTrace a = algorithm1_run(*p.fam, sched, x0, 120);
  const IterateTrace b = relocated_iterate(*p.fam, sched, x0, 120);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK((a.rows[i].x - b.rows[i].x).norm() <= 1e-12 * (1 + b.rows[i].x.norm()));
    CHECK((a.rows[i].t_of_x - b.rows[i].t_of_x).norm() <= 1e-12 * (1 + b.rows[i].x.norm()));
  }
  for (const char* name : {"z", "y", "w"}) CHECK(a.block(name).size() == a.size());
}

TEST_CASE("algorithm1_run: constant schedule is classical DR and finds the zero") {
  const auto p = make_pair(2, 1.0, 2.0, 1.0, 2.0, 13);
  const auto sched = StepsizeSchedule::constant(1.0, {0.5, 2.0});
  const IterateTrace tr = algorithm1_run(*p.fam, sched, Vector::Zero(2), 300);
  const Vector z = tr.back().blocks.at("z");
  CHECK(((p.m1 + p.m2) * z + p.b1 + p.b2).norm() <= 1e-10);
  CHECK((z - oracle::affine_zero({p.m1, p.m2}, {p.b1, p.b2})).norm() <= 1e-10);

  const DRFamily zeros(make_affine(Matrix::Zero(2, 2), Vector::Zero(2)),
                       make_affine(Matrix::Zero(2, 2), Vector::Zero(2)), {0.5, 2.0});
  const Vector x0 = Vector::Constant(2, 3.0);
  for (const auto& row : algorithm1_run(zeros, sched, x0, 20).rows) CHECK(row.x == x0);
}

TEST_CASE("algorithm1_run: geometric schedule converges at the predicted rate") {
  const auto p = make_pair(10, 1.0, 2.0, 1.0, 2.0, 14);
  const Interval iv{0.5, 2.0};
  const auto sched = StepsizeSchedule::geometric(1.0, 1.0, 0.5, iv);
  const double beta_bar = dr_uniform_contraction_factor(iv, 1.0, 2.0);
  const IterateTrace long_run = algorithm1_run(*p.fam, sched, Vector::Zero(10), 1200);
  const Vector limit = long_run.back().x;
  std::vector<double> err;
  for (std::size_t i = 0; i <= 300; ++i) err.push_back((long_run.rows[i].x - limit).norm());
  const RateEstimate est = fit_linear_rate(err);
  CHECK(est.r_linear);
  CHECK(est.r <= std::max(beta_bar, 0.5) + 0.05);
  CHECK(rel(limit, oracle::dr_fixed_point(p.m1, p.b1, p.m2, p.b2, 1.0)) <= 1e-10);
}

TEST_CASE("primal/dual sequences") {
  SUBCASE("symmetric zero problem") {
    const DRFamily fam(make_affine(2.0 * Matrix::Identity(3, 3), Vector::Zero(3)),
                       make_affine(2.0 * Matrix::Identity(3, 3), Vector::Zero(3)), {0.5, 2.0});
    const auto sched = StepsizeSchedule::geometric(1.0, 1.0, 0.5, {0.5, 2.0});
    const auto pd = primal_dual_extract(algorithm1_run(fam, sched, Vector::Constant(3, 4.0), 200));
    CHECK(pd.z.back().norm() <= 1e-12);
    CHECK(pd.g.back().norm() <= 1e-12);
    CHECK(pd.y.back().norm() <= 1e-12);
    CHECK(pd.h.back().norm() <= 1e-12);
  }
  SUBCASE("affine pair with known zero") {
    const auto p = make_pair(5, 0.5, 2.0, 1.0, 3.0, 15);
    const auto sched = StepsizeSchedule::geometric(1.0, 1.0, 0.5, {0.5, 2.0});
    const IterateTrace tr = algorithm1_run(*p.fam, sched, Vector::Zero(5), 400);
    const auto pd = primal_dual_extract(tr);
    const oracle::Vec zs = oracle::affine_zero({p.m1, p.m2}, {p.b1, p.b2});
    const oracle::Vec gs = p.m1 * zs + p.b1;
    CHECK((pd.z.back() - zs).norm() <= 1e-9);
    CHECK((pd.g.back() - gs).norm() <= 1e-9);
    // Dual inclusion through the affine inverses: A1^{-1} g = A2^{-1}(-g).
    const AffineMonotoneOperator a1(p.m1, p.b1), a2(p.m2, p.b2);
    CHECK((inverse_apply(a1, pd.g.back()) - inverse_apply(a2, -pd.g.back())).norm() <= 1e-6);
    for (std::size_t n = 0; n < pd.g.size(); ++n) {
      const double lhs = (pd.h[n] - gs).norm();
      const double rhs = (pd.g[n] - gs).norm();
      CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + rhs));
    }
  }
  SUBCASE("needs the bookkeeping blocks") {
    const auto p = make_pair(2, 0.5, 2.0, 1.0, 3.0, 16);
    const auto tr = relocated_iterate(*p.fam, StepsizeSchedule::constant(1.0, {0.5, 2.0}), Vector::Zero(2), 5);
    CHECK_THROWS_AS(primal_dual_extract(tr), MissingBlocks);
  }
}

TEST_CASE("contraction factor closed form") {
  CHECK(dr_contraction_factor(1.0, 1.0, 1.0) == doctest::Approx((std::sqrt(6.0) + 1.0) / 4.0).epsilon(1e-14));
  for (double g : {0.1, 0.5, 1.0, 2.0, 10.0}) {
    const double b = dr_contraction_factor(g, 1.0, 1.0);
    CHECK(b > 0.0);
    CHECK(b < 1.0);
  }
  CHECK_THROWS_AS(dr_contraction_factor(0.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(dr_contraction_factor(1.0, -1.0, 1.0), DomainError);
  CHECK_THROWS_AS(dr_contraction_factor(1.0, 1.0, 0.0), DomainError);

  const Interval iv{0.5, 2.0};
  const double bar = dr_uniform_contraction_factor(iv, 1.0, 2.0);
  for (int k = 0; k <= 50; ++k) CHECK(dr_contraction_factor(0.5 + 1.5 * k / 50.0, 1.0, 2.0) <= bar);
}

TEST_CASE("sampled Lipschitz ratios stay below the contraction factor") {
  // A1 monotone with L = 1, A2 1-strongly monotone.
  const auto p = make_pair(4, 0.1, 1.0, 1.0, 3.0, 17);
  REQUIRE(p.fam->contraction_factor().has_value());
  for (double g : {0.5, 0.875, 1.25, 1.625, 2.0}) {
    const double beta = dr_contraction_factor(g, 1.0, 1.0);
    CHECK(sample_lipschitz_ratio(*p.fam, g, 1000, 18) <= beta + 1e-9);
  }
  CHECK(*p.fam->contraction_factor() >= dr_contraction_factor(1.0, 1.0, 1.0));
}

TEST_CASE("regularity constant") {
  CHECK(dr_regularity_constant(1.0, 1.0, 1.0) == 8.0);
  CHECK(dr_regularity_constant(2.0, 1.0, 1.0) == 12.0);
  CHECK(dr_regularity_constant(0.5, 1.0, 1.0) == 12.0);
  CHECK_THROWS_AS(dr_regularity_constant(1.0, 0.0, 1.0), DomainError);

  const auto p = make_pair(4, 0.5, 2.0, 1.0, 3.0, 19);
  const RegularityModuli mod = dr_default_moduli(*p.fam);
  Eigen::SelfAdjointEigenSolver<oracle::Mat> es(p.m1);
  CHECK(mod.mu == doctest::Approx(es.eigenvalues()(0)).epsilon(1e-10));
  CHECK(mod.rho == doctest::Approx(1.0 / es.eigenvalues()(3)).epsilon(1e-10));
  for (double g : {0.5, 1.0, 2.0}) {
    const double kappa = dr_regularity_constant(g, mod.mu, mod.rho);
    const Vector center = oracle::dr_fixed_point(p.m1, p.b1, p.m2, p.b2, g);
    CHECK(verify_error_bound(*p.fam, g, kappa, SampleBox::around(center, 3.0), 1000, 20).pass());
    CHECK(verify_error_bound(*p.fam, g, 0.01, SampleBox::around(center, 3.0), 1000, 20).violations > 0);
  }

  std::mt19937_64 rng(21);
  const DRFamily skewed(make_affine(oracle::skew(2, 1.0, rng), Vector::Zero(2)),
                        make_affine(Matrix::Identity(2, 2), Vector::Zero(2)), {0.5, 2.0});
  CHECK_THROWS_AS(dr_default_moduli(skewed), UnsupportedOperator);
}

TEST_CASE("fix decomposition") {
  SUBCASE("identity pair") {
    const DRFamily fam(make_affine(Matrix::Identity(2, 2), Vector::Zero(2)),
                       make_affine(Matrix::Identity(2, 2), Vector::Zero(2)), {0.5, 2.0});
    const auto d = fix_decomposition_check(fam, 1.0, Vector::Zero(2));
    CHECK(d.z.norm() == 0.0);
    CHECK(d.g.norm() == 0.0);
    CHECK(d.primal_residual == 0.0);
    CHECK(d.dual_residual == 0.0);
    CHECK(d.reconstruction_error == 0.0);
  }
  SUBCASE("random symmetric pair, both directions") {
    const auto p = make_pair(5, 0.5, 2.0, 1.0, 3.0, 22);
    const oracle::Vec zs = oracle::affine_zero({p.m1, p.m2}, {p.b1, p.b2});
    const oracle::Vec gs = p.m1 * zs + p.b1;
    REQUIRE(gs.norm() > 1e-3);
    for (double g : {0.7, 1.6}) {
      const Vector x = fixed_point_oracle(*p.fam, g, Vector::Zero(5));
      const auto d = fix_decomposition_check(*p.fam, g, x);
      CHECK(d.primal_residual <= 1e-8);
      CHECK(d.dual_via_inverse);
      CHECK(d.dual_residual <= 1e-8);
      CHECK(d.reconstruction_error <= 1e-14 * (1 + x.norm()));
      CHECK((d.z - zs).norm() <= 1e-9);
      CHECK((d.g - gs).norm() <= 1e-9);
      // Converse: primal plus scaled dual is a fixed point.
      const Vector built = zs + g * gs;
      CHECK(fixed_point_residual(*p.fam, g, built) <= 1e-8);
    }
    CHECK_THROWS_AS(fix_decomposition_check(*p.fam, 1.0, Vector::Constant(5, 10.0)), NotAFixedPoint);
  }
  SUBCASE("direct primal solve") {
    const auto p = make_pair(3, 0.5, 2.0, 1.0, 3.0, 23);
    CHECK((dr_affine_primal_solution(*p.fam) - oracle::affine_zero({p.m1, p.m2}, {p.b1, p.b2})).norm() <= 1e-12);
  }
}

TEST_CASE("fixed sets move with the stepsize and the relocator tracks them") {
  const auto p = make_pair(4, 0.5, 2.0, 1.0, 3.0, 24);
  const Vector xa = fixed_point_oracle(*p.fam, 0.7, Vector::Zero(4));
  const Vector xb = fixed_point_oracle(*p.fam, 1.6, Vector::Zero(4));
  CHECK((xa - xb).norm() >= 1e-3);
  CHECK((p.fam->relocate(1.6, 0.7, xa) - xb).norm() <= 1e-8);
  CHECK((p.fam->relocate(0.7, 1.6, xb) - xa).norm() <= 1e-8);
}

TEST_CASE("summability bound for geometric schedules") {
  const auto p = make_pair(2, 0.5, 2.0, 1.0, 3.0, 25, {1.0, 2.0});
  const auto sched = StepsizeSchedule::geometric(1.0, 1.0, 0.5, {1.0, 2.0});
  CHECK(dr_summability_bound(sched) == doctest::Approx(3.0));
  const auto rep = summability_report(*p.fam, sched, 2000);
  CHECK(rep.converged);
  for (double s : rep.partial_sums) CHECK(s <= 3.0 + 1e-12);

  const auto flat = StepsizeSchedule::geometric(1.0, 0.0, 0.5, {1.0, 2.0});
  CHECK(dr_summability_bound(flat) == 0.0);
  CHECK(summability_report(*p.fam, StepsizeSchedule::constant(1.5, {1.0, 2.0}), 100).partial_sums.back() == 0.0);
  CHECK_THROWS_AS(dr_summability_bound(StepsizeSchedule::polynomial(1.0, 1.0, 2.0, {1.0, 2.0})), DomainError);
}

TEST_CASE("relocator is Lipschitz in the stepsize on fixed points") {
  const auto p = make_pair(3, 0.5, 2.0, 1.0, 3.0, 26);
  std::vector<std::pair<Vector, double>> pts;
  for (double g : {0.5, 1.0, 2.0}) pts.emplace_back(fixed_point_oracle(*p.fam, g, Vector::Zero(3)), g);
  const auto probe = gamma_lipschitz_probe(*p.fam, pts, {0.5, 0.75, 1.0, 1.5, 2.0});
  // On Fix T_g, Q x - x = (delta - g) g*, so the ratio is exactly ||g*||.
  const oracle::Vec zs = oracle::affine_zero({p.m1, p.m2}, {p.b1, p.b2});
  CHECK(probe.l_estimate == doctest::Approx((p.m1 * zs + p.b1).norm()).epsilon(1e-8));
}
