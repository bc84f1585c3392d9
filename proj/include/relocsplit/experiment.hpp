#pragma once

#include "relocsplit/config.hpp"
#include "relocsplit/family.hpp"

#include <json.hpp>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace relocsplit {

struct CheckRecord {
  std::string name;
  bool pass = false;
  std::optional<double> certified_constant;
  std::optional<double> worst_ratio;
  std::optional<double> fitted_C;
  std::optional<double> fitted_r;
  std::optional<double> fit_quality;
  std::string note;
};

/// Everything a configured run needs, built deterministically from the config.
struct Experiment {
  std::vector<OperatorPtr> ops;
  std::shared_ptr<const OperatorFamily> family;
  StepsizeSchedule schedule;
  Vector x0;
};

/// Generates the problem and family. For mt the contraction certificate is
/// attached when one of the two structural cases holds. Throws ConfigError
/// when a requested check needs a certificate the family cannot get.
Experiment build_experiment(const ExperimentConfig& config);

struct ExperimentResult {
  IterateTrace trace;
  std::vector<std::string> block_names;
  Vector limit;
  std::vector<CheckRecord> records;

  bool all_pass() const;
};

/// Runs the algorithm, attaches err_to_limit (and dist_to_fix when the
/// fixed point is a certified singleton), then every requested check.
ExperimentResult run_experiment(const ExperimentConfig& config);

nlohmann::json report_json(const ExperimentConfig& config, const ExperimentResult& result);

/// Process exit codes.
inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitIoError = 3;

struct RunOutcome {
  int exit_code = kExitPass;
  std::string message;
  std::optional<nlohmann::json> report;
};

/// Loads, runs and writes the outputs of one config file; never throws.
/// With `write_trace` false the trace file is skipped.
RunOutcome run_config_file(const std::string& path, const std::vector<Override>& overrides, bool write_trace);

}  // namespace relocsplit
