#pragma once

#include "relocsplit/problem.hpp"
#include "relocsplit/schedule.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace relocsplit {

enum class Algorithm { kDouglasRachford, kMalitskyTam, kScalarCounterexample };

enum class Check {
  kErrorBound,
  kOneStep,
  kRateTheorem,
  kRelocatorBijection,
  kFixDecomposition,
  kSummability,
  kGammaLipschitz,
  kConsensus,
};

std::string to_string(Algorithm algorithm);
std::string to_string(Check check);
Algorithm algorithm_from_string(const std::string& name);
Check check_from_string(const std::string& name);
const std::vector<Check>& all_checks();

struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::kGeometric;
  double gamma_star = 1.0;
  double scale = 1.0;
  double ratio = 0.5;
  double power = 2.0;
  Interval interval{0.5, 2.0};

  StepsizeSchedule build() const;
};

struct ExperimentConfig {
  Algorithm algorithm = Algorithm::kDouglasRachford;
  ProblemSpec problem;
  ScheduleSpec schedule;
  double theta = 0.5;
  /// Contraction factor of the scalar counterexample.
  double beta = 0.5;
  /// Starting point; empty means gamma_0 for the scalar family and zero otherwise.
  std::optional<Vector> x0;
  long n_steps = 300;
  std::vector<Check> checks;
  /// "checks = all": expanded to every check applicable to the algorithm.
  bool checks_all = false;
  std::string trace_path;
  std::string report_path;
  /// Where the config came from (file path or "<text>").
  std::string source = "<text>";
};

using Override = std::pair<std::string, std::string>;

/// Splits "key=value"; throws ConfigError when there is no '='.
Override parse_override(const std::string& text);

/// Flat "key = value" lines; '#' starts a comment. Later lines and the
/// overrides win. Unknown keys are errors. Throws ConfigError.
ExperimentConfig parse_config(const std::string& text, const std::vector<Override>& overrides = {});

/// Reads the file (IoError when unreadable), applies RELOCSPLIT_SEED from
/// the environment, then the overrides.
ExperimentConfig load_config(const std::string& path, const std::vector<Override>& overrides = {});

/// Checks that can run for the algorithm and problem kind.
std::vector<Check> applicable_checks(Algorithm algorithm, ProblemKind kind);

/// Rejects checks that cannot apply to the algorithm/problem pair.
void validate_config(const ExperimentConfig& config);

}  // namespace relocsplit
