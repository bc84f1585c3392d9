// Command-line front end: run / verify experiments and fit rates from traces.

#include "relocsplit/diagnostics.hpp"
#include "relocsplit/errors.hpp"
#include "relocsplit/experiment.hpp"
#include "relocsplit/trace_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <iostream>
#include <mutex>
#include <thread>

namespace {

using namespace relocsplit;

// Config and I/O errors outrank check failures.
int severity(int code) {
  switch (code) {
    case kExitPass: return 0;
    case kExitCheckFailed: return 1;
    case kExitIoError: return 2;
    case kExitConfigError: return 3;
  }
  return 3;
}

int run_many(const std::vector<std::string>& configs, const std::vector<std::string>& sets, unsigned jobs,
             bool write_trace) {
  std::vector<Override> overrides;
  try {
    for (const auto& s : sets) overrides.push_back(parse_override(s));
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }

  std::vector<RunOutcome> outcomes(configs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      outcomes[i] = run_config_file(configs[i], overrides, write_trace);
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(configs.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int worst = kExitPass;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const auto& o = outcomes[i];
    if (o.report) {
      std::cout << "== " << configs[i] << " : " << (*o.report)["status"].get<std::string>() << '\n';
      for (const auto& rec : (*o.report)["records"]) {
        std::cout << "  " << rec["status"].get<std::string>() << "  " << rec["name"].get<std::string>();
        if (!rec["note"].get<std::string>().empty()) std::cout << "  (" << rec["note"].get<std::string>() << ')';
        std::cout << '\n';
      }
    }
    if (!o.message.empty()) std::cerr << configs[i] << ": " << o.message << '\n';
    if (severity(o.exit_code) > severity(worst)) worst = o.exit_code;
  }
  return worst;
}

int rate_command(const std::string& path, const std::string& column, long burn_in, bool has_burn_in) {
  try {
    const CsvTable table = read_csv(path);
    const std::vector<double> values = table.column(column);
    const RateEstimate est =
        fit_linear_rate(values, has_burn_in ? std::optional<long>(burn_in) : std::nullopt);
    nlohmann::json out = {{"column", column},    {"C", est.C},
                          {"r", est.r},          {"fit_quality", est.fit_quality},
                          {"burn_in", est.burn_in}, {"n_used", est.n_used},
                          {"r_linear", est.r_linear}, {"note", est.note}};
    std::cout << out.dump(2) << '\n';
    return est.r_linear ? kExitPass : kExitCheckFailed;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIoError;
  } catch (const Error& e) {
    std::cerr << "rate fit failed: " << e.what() << '\n';
    return kExitCheckFailed;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"relocated Douglas-Rachford / Malitsky-Tam experiment runner"};
  app.require_subcommand(1);

  std::vector<std::string> run_configs;
  std::vector<std::string> run_sets;
  unsigned jobs = 1;
  auto* run = app.add_subcommand("run", "run experiments and write trace CSV and JSON report");
  run->add_option("configs", run_configs, "config files")->required()->check(CLI::ExistingFile);
  run->add_option("--set", run_sets, "override a config key (key=value)");
  run->add_option("--jobs", jobs, "configs to run concurrently")->check(CLI::PositiveNumber);

  std::string verify_config;
  std::vector<std::string> verify_sets;
  auto* verify = app.add_subcommand("verify", "run checks only; no trace file is written");
  verify->add_option("config", verify_config, "config file")->required()->check(CLI::ExistingFile);
  verify->add_option("--set", verify_sets, "override a config key (key=value)");

  std::string rate_path;
  std::string rate_column = "err_to_limit";
  long burn_in = 0;
  auto* rate = app.add_subcommand("rate", "fit an R-linear envelope to a trace column");
  rate->add_option("trace", rate_path, "trace CSV")->required()->check(CLI::ExistingFile);
  rate->add_option("--column", rate_column, "column to fit")->capture_default_str();
  auto* burn_opt = rate->add_option("--burn-in", burn_in, "leading rows to skip");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfigError;
  }

  if (*run) return run_many(run_configs, run_sets, jobs, true);
  if (*verify) return run_many({verify_config}, verify_sets, 1, false);
  if (*rate) return rate_command(rate_path, rate_column, burn_in, burn_opt->count() > 0);
  return kExitConfigError;
}
