#include "relocsplit/config.hpp"

#include "relocsplit/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace relocsplit {

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kDouglasRachford: return "dr";
    case Algorithm::kMalitskyTam: return "mt";
    case Algorithm::kScalarCounterexample: return "scalar_counterexample";
  }
  return "unknown";
}

std::string to_string(Check check) {
  switch (check) {
    case Check::kErrorBound: return "error_bound";
    case Check::kOneStep: return "one_step";
    case Check::kRateTheorem: return "rate_theorem";
    case Check::kRelocatorBijection: return "relocator_bijection";
    case Check::kFixDecomposition: return "fix_decomposition";
    case Check::kSummability: return "summability";
    case Check::kGammaLipschitz: return "gamma_lipschitz";
    case Check::kConsensus: return "consensus";
  }
  return "unknown";
}

const std::vector<Check>& all_checks() {
  static const std::vector<Check> checks{Check::kErrorBound,         Check::kOneStep,
                                         Check::kRateTheorem,        Check::kRelocatorBijection,
                                         Check::kFixDecomposition,   Check::kSummability,
                                         Check::kGammaLipschitz,     Check::kConsensus};
  return checks;
}

Algorithm algorithm_from_string(const std::string& name) {
  for (auto a : {Algorithm::kDouglasRachford, Algorithm::kMalitskyTam, Algorithm::kScalarCounterexample}) {
    if (to_string(a) == name) return a;
  }
  throw ConfigError("unknown algorithm '" + name + "'");
}

Check check_from_string(const std::string& name) {
  for (auto c : all_checks()) {
    if (to_string(c) == name) return c;
  }
  throw ConfigError("unknown check '" + name + "'");
}

StepsizeSchedule ScheduleSpec::build() const {
  try {
    switch (kind) {
      case ScheduleKind::kConstant: return StepsizeSchedule::constant(gamma_star, interval);
      case ScheduleKind::kGeometric: return StepsizeSchedule::geometric(gamma_star, scale, ratio, interval);
      case ScheduleKind::kPolynomial: return StepsizeSchedule::polynomial(gamma_star, scale, power, interval);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("schedule: ") + e.what());
  }
  throw ConfigError("unknown schedule kind");
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (value.empty() || end == nullptr || *end != '\0' || !std::isfinite(v)) {
    throw ConfigError("key '" + key + "' expects a number, got '" + value + "'");
  }
  return v;
}

long to_long(const std::string& key, const std::string& value) {
  const double v = to_double(key, value);
  if (v != std::floor(v)) throw ConfigError("key '" + key + "' expects an integer, got '" + value + "'");
  return static_cast<long>(v);
}

std::uint64_t to_seed(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (value.empty() || *end != '\0' || value.front() == '-') {
    throw ConfigError("key '" + key + "' expects a nonnegative integer, got '" + value + "'");
  }
  return static_cast<std::uint64_t>(v);
}

// "M3" -> 2 (0-based slot of the third operator).
std::size_t operator_slot(const std::string& key, const std::string& suffix) {
  const std::string digits = suffix.substr(1);
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](unsigned char c) { return std::isdigit(c); })) {
    throw ConfigError("unknown key '" + key + "'");
  }
  const long idx = std::stol(digits);
  if (idx < 1 || idx > 64) throw ConfigError("operator index out of range in '" + key + "'");
  return static_cast<std::size_t>(idx - 1);
}

void apply_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  static const std::map<std::string, std::function<void(ExperimentConfig&, const std::string&, const std::string&)>>
      setters{
          {"algorithm", [](auto& c, auto&, auto& v) { c.algorithm = algorithm_from_string(v); }},
          {"problem.kind", [](auto& c, auto&, auto& v) { c.problem.kind = problem_kind_from_string(v); }},
          {"problem.dim", [](auto& c, auto& k, auto& v) { c.problem.dim = to_long(k, v); }},
          {"problem.N", [](auto& c, auto& k, auto& v) { c.problem.n_ops = to_long(k, v); }},
          {"problem.seed", [](auto& c, auto& k, auto& v) { c.problem.seed = to_seed(k, v); }},
          {"problem.mu_target", [](auto& c, auto& k, auto& v) { c.problem.mu_target = to_double(k, v); }},
          {"problem.L_target", [](auto& c, auto& k, auto& v) { c.problem.lipschitz_target = to_double(k, v); }},
          {"problem.box_half_width", [](auto& c, auto& k, auto& v) { c.problem.box_half_width = to_double(k, v); }},
          {"schedule.kind", [](auto& c, auto&, auto& v) { c.schedule.kind = schedule_kind_from_string(v); }},
          {"schedule.gamma_star", [](auto& c, auto& k, auto& v) { c.schedule.gamma_star = to_double(k, v); }},
          {"schedule.C", [](auto& c, auto& k, auto& v) { c.schedule.scale = to_double(k, v); }},
          {"schedule.r", [](auto& c, auto& k, auto& v) { c.schedule.ratio = to_double(k, v); }},
          {"schedule.p", [](auto& c, auto& k, auto& v) { c.schedule.power = to_double(k, v); }},
          {"schedule.gamma_low", [](auto& c, auto& k, auto& v) { c.schedule.interval.low = to_double(k, v); }},
          {"schedule.gamma_high", [](auto& c, auto& k, auto& v) { c.schedule.interval.high = to_double(k, v); }},
          {"theta", [](auto& c, auto& k, auto& v) { c.theta = to_double(k, v); }},
          {"beta", [](auto& c, auto& k, auto& v) { c.beta = to_double(k, v); }},
          {"x0", [](auto& c, auto&, auto& v) { c.x0 = parse_vector(v); }},
          {"n_steps", [](auto& c, auto& k, auto& v) { c.n_steps = to_long(k, v); }},
          {"output.trace_path", [](auto& c, auto&, auto& v) { c.trace_path = v; }},
          {"output.report_path", [](auto& c, auto&, auto& v) { c.report_path = v; }},
          {"checks",
           [](auto& c, auto&, auto& v) {
             c.checks.clear();
             c.checks_all = (v == "all");
             if (c.checks_all) return;
             std::stringstream in(v);
             std::string item;
             while (std::getline(in, item, ',')) {
               item = trim(item);
               if (item.empty()) continue;
               const Check check = check_from_string(item);
               if (std::find(c.checks.begin(), c.checks.end(), check) == c.checks.end()) c.checks.push_back(check);
             }
           }},
      };

  if (auto it = setters.find(key); it != setters.end()) {
    it->second(cfg, key, value);
    return;
  }
  // problem.M<i> / problem.b<i> for custom matrices.
  const std::string prefix = "problem.";
  if (key.rfind(prefix, 0) == 0 && key.size() > prefix.size() + 1) {
    const std::string suffix = key.substr(prefix.size());
    if (suffix[0] == 'M' || suffix[0] == 'b') {
      const std::size_t slot = operator_slot(key, suffix);
      if (suffix[0] == 'M') {
        if (cfg.problem.matrices.size() <= slot) cfg.problem.matrices.resize(slot + 1);
        cfg.problem.matrices[slot] = parse_matrix(value);
      } else {
        if (cfg.problem.offsets.size() <= slot) cfg.problem.offsets.resize(slot + 1);
        cfg.problem.offsets[slot] = parse_vector(value);
      }
      return;
    }
  }
  throw ConfigError("unknown key '" + key + "'");
}

}  // namespace

Override parse_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + text + "' is not key=value");
  return {trim(text.substr(0, eq)), trim(text.substr(eq + 1))};
}

ExperimentConfig parse_config(const std::string& text, const std::vector<Override>& overrides) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    try {
      apply_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  for (const auto& [key, value] : overrides) apply_key(cfg, key, value);

  for (std::size_t i = 0; i < cfg.problem.matrices.size(); ++i) {
    if (cfg.problem.matrices[i].size() == 0) {
      throw ConfigError("problem.M" + std::to_string(i + 1) + " is missing");
    }
  }
  if (cfg.problem.kind == ProblemKind::kCustomMatrices) {
    cfg.problem.n_ops = static_cast<Index>(cfg.problem.matrices.size());
    if (!cfg.problem.matrices.empty()) cfg.problem.dim = cfg.problem.matrices.front().rows();
  }
  if (cfg.checks_all) cfg.checks = applicable_checks(cfg.algorithm, cfg.problem.kind);
  validate_config(cfg);
  return cfg;
}

std::vector<Check> applicable_checks(Algorithm algorithm, ProblemKind kind) {
  std::vector<Check> out;
  for (Check c : all_checks()) {
    const bool contraction_check = c == Check::kErrorBound || c == Check::kOneStep || c == Check::kRateTheorem;
    switch (algorithm) {
      case Algorithm::kScalarCounterexample:
        if (c == Check::kFixDecomposition || c == Check::kConsensus) continue;
        break;
      case Algorithm::kDouglasRachford:
        if (c == Check::kFixDecomposition && kind != ProblemKind::kAffineStronglyMonotone &&
            kind != ProblemKind::kCustomMatrices) {
          continue;
        }
        if (contraction_check && kind == ProblemKind::kAffinePlusBox) continue;
        break;
      case Algorithm::kMalitskyTam:
        if (c == Check::kFixDecomposition) continue;
        break;
    }
    out.push_back(c);
  }
  return out;
}

ExperimentConfig load_config(const std::string& path, const std::vector<Override>& overrides) {
  std::ifstream file(path);
  if (!file) throw IoError("cannot read config '" + path + "'");
  std::stringstream buf;
  buf << file.rdbuf();
  std::vector<Override> all;
  if (const char* env = std::getenv("RELOCSPLIT_SEED"); env != nullptr && *env != '\0') {
    all.emplace_back("problem.seed", env);
  }
  all.insert(all.end(), overrides.begin(), overrides.end());
  ExperimentConfig cfg = parse_config(buf.str(), all);
  cfg.source = path;
  return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.n_steps < 20) throw ConfigError("n_steps must be >= 20");
  if (!(cfg.theta > 0.0 && cfg.theta < 1.0)) throw ConfigError("theta must lie in (0,1)");
  if (!(cfg.beta >= 0.0 && cfg.beta < 1.0)) throw ConfigError("beta must lie in [0,1)");
  (void)cfg.schedule.build();

  const auto has = [&](Check c) { return std::find(cfg.checks.begin(), cfg.checks.end(), c) != cfg.checks.end(); };
  switch (cfg.algorithm) {
    case Algorithm::kScalarCounterexample:
      if (has(Check::kFixDecomposition) || has(Check::kConsensus)) {
        throw ConfigError("fix_decomposition and consensus do not apply to scalar_counterexample");
      }
      if (cfg.x0 && cfg.x0->size() != 1) throw ConfigError("x0 must be a single number for scalar_counterexample");
      break;
    case Algorithm::kDouglasRachford:
      if (cfg.problem.n_ops != 2) throw ConfigError("dr needs exactly two operators (problem.N = 2)");
      if (has(Check::kFixDecomposition) && cfg.problem.kind != ProblemKind::kAffineStronglyMonotone &&
          cfg.problem.kind != ProblemKind::kCustomMatrices) {
        throw ConfigError("fix_decomposition needs a symmetric affine pair");
      }
      if (cfg.problem.kind == ProblemKind::kAffinePlusBox &&
          (has(Check::kErrorBound) || has(Check::kOneStep) || has(Check::kRateTheorem))) {
        throw ConfigError("dr with a box as A2 has no contraction certificate for error_bound/one_step/rate_theorem");
      }
      break;
    case Algorithm::kMalitskyTam:
      if (has(Check::kFixDecomposition)) throw ConfigError("fix_decomposition only applies to dr");
      if (cfg.problem.n_ops < 2) throw ConfigError("mt needs problem.N >= 2");
      break;
  }
}

}  // namespace relocsplit
