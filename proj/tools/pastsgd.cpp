// Command-line front end: run a configured training experiment, sweep a
// config across confidence levels, or verify the numerical core against
// its built-in oracles.
//
// Exit codes: 0 success, 1 verification failure (or unexpected error),
// 2 bad configuration, 3 data/output I/O failure.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pastsgd/errors.hpp"
#include "pastsgd/experiment.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& output) {
  pastsgd::RunSpec spec = pastsgd::parse_run_config_file(config_path);
  pastsgd::RunSummary s = pastsgd::execute_run(spec, output);
  if (s.metric_name == "none")
    std::printf("run %s: policy=%s iterations=%ld samples=%ld metrics=%s\n",
                spec.experiment.c_str(), s.policy.c_str(), s.iterations, s.samples,
                s.output_path.c_str());
  else
    std::printf("run %s: policy=%s iterations=%ld samples=%ld %s=%.6g metrics=%s\n",
                spec.experiment.c_str(), s.policy.c_str(), s.iterations, s.samples,
                s.metric_name.c_str(), s.final_metric, s.output_path.c_str());
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::vector<double>& deltas,
              const std::string& output) {
  pastsgd::RunSpec spec = pastsgd::parse_run_config_file(config_path);
  std::string table = pastsgd::execute_sweep(spec, deltas, output);
  std::printf("sweep %s: %zu deltas x %zu policies -> %s\n", spec.experiment.c_str(),
              deltas.size(), spec.policies.size(), table.c_str());
  return 0;
}

int cmd_verify(std::uint64_t seed) {
  std::vector<pastsgd::VerifyCheck> checks = pastsgd::run_verification(seed);
  std::printf("%s\n", pastsgd::verification_report_json(checks).c_str());
  return pastsgd::all_pass(checks) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive mini-batch SGD experiments"};
  app.require_subcommand(1);

  std::string run_config, run_output;
  CLI::App* run = app.add_subcommand("run", "Train with the configured policy, write metrics CSV");
  run->add_option("--config", run_config, "JSON run config")->required();
  run->add_option("--output", run_output, "Metrics CSV path (overrides the config)");

  std::string sweep_config, sweep_output;
  std::vector<double> sweep_deltas;
  CLI::App* sweep =
      app.add_subcommand("sweep", "Rerun the config at each confidence level, write a table");
  sweep->add_option("--config", sweep_config, "JSON run config")->required();
  sweep->add_option("--deltas", sweep_deltas, "Comma-separated confidence levels")
      ->required()
      ->delimiter(',');
  sweep->add_option("--output", sweep_output, "Table CSV path");

  std::uint64_t verify_seed = 12345;
  CLI::App* verify = app.add_subcommand("verify", "Cross-check sizers, bounds and derivatives");
  verify->add_option("--seed", verify_seed, "RNG seed for the checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_config, run_output);
    if (sweep->parsed()) return cmd_sweep(sweep_config, sweep_deltas, sweep_output);
    return cmd_verify(verify_seed);
  } catch (const pastsgd::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const pastsgd::DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
