#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pastsgd/batch_size.hpp"
#include "pastsgd/step_size.hpp"
#include "pastsgd/trainer.hpp"

namespace pastsgd {

// Dataset descriptions as they appear in run configs. Relative paths are
// resolved against the PASTSGD_DATA_DIR environment variable when it is set.
struct IdxDatasetSpec {
  std::string images;
  std::string labels;
  std::string test_images;  // optional companion test pair
  std::string test_labels;
  long subset = 0;  // 0 = all rows
  long test_subset = 0;
  bool scale_to_unit = true;
};
struct CsvDatasetSpec {
  std::string path;
  std::string target_column;
  std::vector<std::string> feature_columns;
  bool normalize = true;       // standardize features, fit on the training split
  double test_fraction = 0.2;  // held-out share
  std::optional<std::uint64_t> split_seed;  // defaults to the run seed
};
struct StreamDatasetSpec {
  int degree = 2;
  double noise_sigma = 0.05;
  long change_period = 35;
};
using DatasetSpecVar = std::variant<IdxDatasetSpec, CsvDatasetSpec, StreamDatasetSpec>;

// Model as configured; input dimension and class count are filled in from
// the dataset when the run is assembled.
struct ModelConfig {
  std::string kind;  // linear_regression | logistic_regression | mlp
  std::vector<long> hidden;
};

struct PolicyConfig {
  BatchPolicy policy;
  bool gamma_explicit = false;  // sweep keeps an explicit DSG gamma fixed
};

struct RunSpec {
  std::string experiment;
  std::uint64_t seed = 0;
  std::optional<double> delta;  // default confidence for policies without one
  DatasetSpecVar dataset;
  ModelConfig model;
  std::vector<PolicyConfig> policies;
  StepRuleSpec step_rule = ConstantStepSpec{0.01};
  long initial_n = 2;
  std::optional<long> epochs;
  std::optional<long> max_iterations;
  long n_min = 2;
  std::optional<long> n_max;
  long eval_every = 0;
  std::optional<double> range_override;
  std::string output;  // metrics CSV path; empty = derived from experiment name
};

// Strict JSON parsing: unknown keys are rejected with their full field path,
// missing required fields are named. Throws ConfigError.
RunSpec parse_run_config_text(const std::string& json_text);
RunSpec parse_run_config_file(const std::string& path);

std::string dataset_root();  // PASTSGD_DATA_DIR or empty
std::string resolve_data_path(const std::string& path);

struct RunSummary {
  std::string policy;
  std::string metric_name;  // accuracy | r2 | none
  double final_metric = 0.0;
  long iterations = 0;
  long samples = 0;
  std::string output_path;
};

// Executes the single-policy run described by the config and writes the
// metrics CSV. output_override, when nonempty, wins over the config path.
RunSummary execute_run(const RunSpec& spec, const std::string& output_override = "");

// One run per (delta, policy) cell; writes a delta-by-policy table with
// metric and iteration count columns. Returns the table path.
std::string execute_sweep(const RunSpec& spec, const std::vector<double>& deltas,
                          const std::string& output_override = "");

struct VerifyCheck {
  std::string name;
  double observed = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

// Fast oracle cross-checks: closed forms against exhaustive scans, the
// worked constants, coverage rates, derivative fidelity, and the
// noise-ratio equivalence.
std::vector<VerifyCheck> run_verification(std::uint64_t seed);
bool all_pass(const std::vector<VerifyCheck>& checks);
std::string verification_report_json(const std::vector<VerifyCheck>& checks);

}  // namespace pastsgd
