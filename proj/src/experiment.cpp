#include "relocsplit/experiment.hpp"

#include "relocsplit/diagnostics.hpp"
#include "relocsplit/dr.hpp"
#include "relocsplit/errors.hpp"
#include "relocsplit/mt.hpp"
#include "relocsplit/trace_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace relocsplit {

namespace {

constexpr int kErrorBoundSamples = 1000;
constexpr int kRelocatorTriples = 100;
constexpr long kSummabilityTerms = 100000;
constexpr double kLawTol = 1e-8;

bool needs_certificate(const ExperimentConfig& cfg) {
  return std::any_of(cfg.checks.begin(), cfg.checks.end(), [](Check c) {
    return c == Check::kErrorBound || c == Check::kOneStep || c == Check::kRateTheorem;
  });
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

CheckRecord from_bound(const std::string& name, const BoundReport& b) {
  CheckRecord rec;
  rec.name = name;
  rec.pass = b.pass();
  rec.certified_constant = b.certified_constant;
  rec.worst_ratio = b.worst_ratio;
  rec.note = std::to_string(b.violations) + " violations in " + std::to_string(b.samples) + " samples";
  return rec;
}

CheckRecord from_rate(const std::string& name, const RateEstimate& est) {
  CheckRecord rec;
  rec.name = name;
  rec.pass = est.r_linear && est.fit_quality >= kMinFitQuality;
  rec.fitted_C = est.C;
  rec.fitted_r = est.r;
  rec.fit_quality = est.fit_quality;
  rec.note = est.note;
  return rec;
}

}  // namespace

Experiment build_experiment(const ExperimentConfig& cfg) {
  const StepsizeSchedule schedule = cfg.schedule.build();
  const Interval interval = cfg.schedule.interval;
  std::vector<OperatorPtr> ops;
  std::shared_ptr<const OperatorFamily> family;

  switch (cfg.algorithm) {
    case Algorithm::kScalarCounterexample:
      family = std::make_shared<ScalarShiftFamily>(cfg.beta, interval);
      break;
    case Algorithm::kDouglasRachford: {
      ops = generate_problem(cfg.problem);
      if (ops.size() != 2) throw ConfigError("dr needs exactly two operators");
      auto dr = std::make_shared<DRFamily>(ops[0], ops[1], interval);
      if (needs_certificate(cfg) && !dr->singleton_fix()) {
        throw ConfigError("requested checks need a contraction certificate; dr needs Lipschitz A1 and strongly monotone A2");
      }
      const bool fix_check = std::find(cfg.checks.begin(), cfg.checks.end(), Check::kFixDecomposition) != cfg.checks.end();
      if (fix_check) {
        for (const auto& op : ops) {
          const auto* a = op->as_affine();
          if (a == nullptr || !a->symmetric()) throw ConfigError("fix_decomposition needs a symmetric affine pair");
        }
      }
      family = std::move(dr);
      break;
    }
    case Algorithm::kMalitskyTam: {
      ops = generate_problem(cfg.problem);
      MTFamily plain(ops, cfg.theta, interval);
      bool first_strong = true;
      for (std::size_t i = 0; i + 1 < ops.size(); ++i) {
        first_strong = first_strong && ops[i]->strong_monotonicity() > 0.0;
      }
      const auto cert = mt_contraction_certificate(
          plain, first_strong ? MTContractionCase::kFirstStrong : MTContractionCase::kLastStrong, cfg.problem.seed);
      if (cert.valid) {
        family = std::make_shared<MTFamily>(ops, cfg.theta, interval, cert.beta);
      } else {
        if (needs_certificate(cfg)) {
          throw ConfigError("requested checks need a contraction certificate: " + cert.note);
        }
        family = std::make_shared<MTFamily>(std::move(plain));
      }
      break;
    }
  }

  Vector x0;
  if (cfg.x0) {
    x0 = *cfg.x0;
    if (x0.size() == 1 && family->dim() > 1) x0 = Vector::Constant(family->dim(), (*cfg.x0)(0));
    if (x0.size() != family->dim()) throw ConfigError("x0 has the wrong length");
  } else if (cfg.algorithm == Algorithm::kScalarCounterexample) {
    x0 = Vector::Constant(1, schedule.at(0));
  } else {
    x0 = Vector::Zero(family->dim());
  }
  return Experiment{std::move(ops), std::move(family), schedule, std::move(x0)};
}

bool ExperimentResult::all_pass() const {
  return std::all_of(records.begin(), records.end(), [](const CheckRecord& r) { return r.pass; });
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const Experiment ex = build_experiment(cfg);
  const OperatorFamily& fam = *ex.family;
  ExperimentResult result;

  switch (cfg.algorithm) {
    case Algorithm::kDouglasRachford:
      result.trace = algorithm1_run(static_cast<const DRFamily&>(fam), ex.schedule, ex.x0, cfg.n_steps);
      result.block_names = {"z", "y", "w"};
      break;
    case Algorithm::kMalitskyTam:
      result.trace = algorithm2_run(static_cast<const MTFamily&>(fam), ex.schedule, ex.x0, cfg.n_steps);
      result.block_names = {"z", "w"};
      break;
    case Algorithm::kScalarCounterexample:
      result.trace = relocated_iterate(fam, ex.schedule, ex.x0, cfg.n_steps);
      break;
  }

  const IterateTrace extended = relocated_iterate(fam, ex.schedule, ex.x0, 4 * cfg.n_steps);
  result.limit = Vector::Zero(ex.x0.size());
  for (std::size_t i = extended.size() - 5; i < extended.size(); ++i) result.limit += extended.rows[i].x;
  result.limit /= 5.0;
  attach_limit_errors(result.trace, result.limit);

  FixedPointCache cache(fam, result.limit);
  if (fam.singleton_fix()) attach_distances(fam, result.trace, cache);

  const double gamma_star = ex.schedule.gamma_star();
  for (Check check : cfg.checks) {
    const std::string name = to_string(check);
    CheckRecord rec;
    switch (check) {
      case Check::kErrorBound: {
        const double kappa = *fam.certified_kappa();
        const Vector& fixed = cache.at(gamma_star);
        rec = from_bound(name, verify_error_bound(fam, gamma_star, kappa, SampleBox::around(fixed, 3.0),
                                                  kErrorBoundSamples, cfg.problem.seed));
        break;
      }
      case Check::kOneStep:
        rec = from_bound(name, verify_one_step_contraction(fam, result.trace, *fam.certified_kappa()));
        break;
      case Check::kRateTheorem: {
        const RateTheoremReport rep = verify_rate_theorem(fam, ex.schedule, ex.x0, cfg.n_steps);
        rec = from_rate(name, rep.iterate_rate);
        rec.pass = rep.pass;
        rec.note = "iterate fit: " + (rep.iterate_rate.note.empty() ? std::string("R-linear") : rep.iterate_rate.note) +
                   " | distance fit r=" + fmt(rep.dist_rate.r) + " quality=" + fmt(rep.dist_rate.fit_quality) +
                   (rep.dist_rate.r_linear ? "" : " (not R-linear)");
        break;
      }
      case Check::kRelocatorBijection: {
        const RelocatorLawReport laws = check_relocator_laws(fam, result.limit, kRelocatorTriples, cfg.problem.seed);
        rec.name = name;
        rec.pass = laws.worst() <= kLawTol;
        rec.worst_ratio = laws.worst();
        rec.note = "identity " + fmt(laws.identity_error) + ", composition " + fmt(laws.composition_error) +
                   ", round trip " + fmt(laws.round_trip_error) + ", target residual " + fmt(laws.target_residual);
        break;
      }
      case Check::kFixDecomposition: {
        const auto& dr = static_cast<const DRFamily&>(fam);
        const Vector& fixed = cache.at(gamma_star);
        const FixDecomposition dec = fix_decomposition_check(dr, gamma_star, fixed);
        // Converse: primal and dual solutions recombine into a fixed point.
        const Vector z = dr_affine_primal_solution(dr);
        const Vector g = dr.a1().evaluate(z);
        const double converse = fixed_point_residual(dr, gamma_star, z + gamma_star * g);
        const double scale = 1.0 + fixed.norm();
        rec.name = name;
        rec.worst_ratio = std::max({dec.primal_residual, dec.dual_residual, converse});
        rec.pass = dec.primal_residual <= kLawTol * scale && dec.dual_residual <= kLawTol * scale &&
                   dec.reconstruction_error <= 1e-12 * scale && converse <= kLawTol * scale;
        rec.note = "primal " + fmt(dec.primal_residual) + ", dual " + fmt(dec.dual_residual) +
                   (dec.dual_via_inverse ? " (inverse)" : " (resolvent)") + ", converse " + fmt(converse);
        break;
      }
      case Check::kSummability: {
        const SummabilityReport sum = summability_report(fam, ex.schedule, kSummabilityTerms);
        rec.name = name;
        rec.worst_ratio = sum.partial_sums.back();
        rec.pass = sum.converged;
        std::optional<double> bound;
        if (ex.schedule.kind() != ScheduleKind::kPolynomial) {
          if (cfg.algorithm == Algorithm::kDouglasRachford) bound = dr_summability_bound(ex.schedule);
          if (cfg.algorithm == Algorithm::kMalitskyTam) {
            bound = mt_summability_bound(ex.schedule, static_cast<const MTFamily&>(fam).count());
          }
          if (cfg.algorithm == Algorithm::kScalarCounterexample) bound = 0.0;
        }
        if (bound) {
          rec.certified_constant = *bound;
          rec.pass = rec.pass && sum.partial_sums.back() <= *bound + 1e-12;
        }
        rec.note = std::string(sum.converged ? "partial sums converged" : "partial sums still growing") +
                   ", final sum " + fmt(sum.partial_sums.back());
        break;
      }
      case Check::kGammaLipschitz: {
        const Interval iv = cfg.schedule.interval;
        std::vector<std::pair<Vector, double>> points;
        std::vector<double> deltas;
        for (int k = 0; k < 5; ++k) {
          const double g = iv.low + (iv.high - iv.low) * k / 4.0;
          points.emplace_back(cache.at(g), g);
        }
        for (int k = 0; k < 9; ++k) deltas.push_back(iv.low + (iv.high - iv.low) * k / 8.0);
        const GammaLipschitzProbe probe = gamma_lipschitz_probe(fam, points, deltas);
        rec.name = name;
        rec.pass = std::isfinite(probe.l_estimate);
        rec.certified_constant = probe.l_estimate;
        rec.note = "largest ratio at gamma=" + fmt(probe.gamma) + ", delta=" + fmt(probe.delta);
        break;
      }
      case Check::kConsensus: {
        std::vector<double> gaps;
        double scale = 1.0;
        if (cfg.algorithm == Algorithm::kMalitskyTam) {
          const auto& mt = static_cast<const MTFamily&>(fam);
          for (const auto& z : result.trace.block("z")) {
            gaps.push_back(consensus_gap(z, mt.count(), mt.op_dim()));
            scale = std::max(scale, z.norm());
          }
        } else {
          const auto z = result.trace.block("z");
          const auto y = result.trace.block("y");
          for (std::size_t i = 0; i < z.size(); ++i) {
            gaps.push_back((z[i] - y[i]).norm());
            scale = std::max(scale, z[i].norm());
          }
        }
        rec = from_rate(name, fit_linear_rate(gaps, std::nullopt, std::max(kRateFloor, 1e-12 * scale)));
        break;
      }
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

namespace {

nlohmann::json opt(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

}  // namespace

nlohmann::json report_json(const ExperimentConfig& cfg, const ExperimentResult& result) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : result.records) {
    records.push_back({{"name", r.name},
                       {"status", r.pass ? "PASS" : "FAIL"},
                       {"certified_constant", opt(r.certified_constant)},
                       {"worst_ratio", opt(r.worst_ratio)},
                       {"fitted_C", opt(r.fitted_C)},
                       {"fitted_r", opt(r.fitted_r)},
                       {"fit_quality", opt(r.fit_quality)},
                       {"note", r.note}});
  }
  const auto& last = result.trace.back();
  return {{"config", cfg.source},
          {"algorithm", to_string(cfg.algorithm)},
          {"problem", cfg.algorithm == Algorithm::kScalarCounterexample ? "scalar" : to_string(cfg.problem.kind)},
          {"seed", cfg.problem.seed},
          {"n_steps", cfg.n_steps},
          {"final_residual", last.residual},
          {"status", result.all_pass() ? "PASS" : "FAIL"},
          {"records", records}};
}

RunOutcome run_config_file(const std::string& path, const std::vector<Override>& overrides, bool write_trace) {
  RunOutcome out;
  try {
    const ExperimentConfig cfg = load_config(path, overrides);
    const ExperimentResult result = run_experiment(cfg);
    if (write_trace && !cfg.trace_path.empty()) write_trace_csv(cfg.trace_path, result.trace, result.block_names);
    out.report = report_json(cfg, result);
    if (!cfg.report_path.empty()) {
      std::ofstream file(cfg.report_path, std::ios::trunc);
      if (!file) throw IoError("cannot open '" + cfg.report_path + "' for writing");
      file << out.report->dump(2) << '\n';
      if (!file.flush()) throw IoError("failed writing '" + cfg.report_path + "'");
    }
    out.exit_code = result.all_pass() ? kExitPass : kExitCheckFailed;
  } catch (const ConfigError& e) {
    out.exit_code = kExitConfigError;
    out.message = std::string("config error: ") + e.what();
  } catch (const IoError& e) {
    out.exit_code = kExitIoError;
    out.message = std::string("I/O error: ") + e.what();
  } catch (const Error& e) {
    out.exit_code = kExitCheckFailed;
    out.message = std::string("run failed: ") + e.what();
  }
  return out;
}

}  // namespace relocsplit
