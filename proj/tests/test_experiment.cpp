#include <cstdlib>
#include <fstream>
#include <random>

#include "doctest.h"
#include "pastsgd/errors.hpp"
#include "pastsgd/experiment.hpp"
#include "support.hpp"

using namespace pastsgd;
using testsupport::TempDir;
using testsupport::read_file_bytes;

namespace {

const char* kMinimalStream = R"({
  "seed": 7,
  "dataset": {"kind": "polynomial_stream"},
  "model": {"kind": "linear_regression"},
  "policy": {"kind": "lpast", "bound": "bernstein", "delta": 0.1},
  "max_iterations": 50,
  "n_max": 400
})";

RunSpec stream_spec(std::uint64_t seed, long iters) {
  RunSpec spec;
  spec.experiment = "unit";
  spec.seed = seed;
  spec.dataset = StreamDatasetSpec{};
  spec.model.kind = "linear_regression";
  spec.policies.push_back(PolicyConfig{LpastPolicy{BoundKind::Bernstein, 0.1}, false});
  spec.step_rule = ConstantStepSpec{0.02};
  spec.initial_n = 4;
  spec.max_iterations = iters;
  spec.n_max = 400;
  return spec;
}

}  // namespace

TEST_CASE("config parsing: defaults fill in around the required fields") {
  RunSpec spec = parse_run_config_text(kMinimalStream);
  CHECK(spec.experiment == "run");
  CHECK(spec.seed == 7);
  CHECK_FALSE(spec.delta.has_value());
  const auto& ds = std::get<StreamDatasetSpec>(spec.dataset);
  CHECK(ds.degree == 2);
  CHECK(ds.noise_sigma == 0.05);
  CHECK(ds.change_period == 35);
  CHECK(spec.model.kind == "linear_regression");
  REQUIRE(spec.policies.size() == 1);
  const auto& lp = std::get<LpastPolicy>(spec.policies[0].policy);
  CHECK(lp.kind == BoundKind::Bernstein);
  CHECK(lp.delta == 0.1);
  CHECK(std::get<ConstantStepSpec>(spec.step_rule).eta == 0.01);
  CHECK(spec.initial_n == 2);
  CHECK(spec.n_min == 2);
  CHECK(spec.max_iterations == 50);
  CHECK_FALSE(spec.epochs.has_value());
  CHECK(spec.eval_every == 0);
  CHECK(spec.output.empty());
}

TEST_CASE("config parsing: unknown keys are rejected with their full path") {
  auto with = [](const std::string& body) { return parse_run_config_text(body); };
  CHECK_THROWS_WITH_AS(with(R"({"seed":1,"bogus":2,"dataset":{"kind":"polynomial_stream"},
      "model":{"kind":"linear_regression"},
      "policy":{"kind":"fixed","n":8},"max_iterations":5,"n_max":10})"),
                       doctest::Contains("unknown key 'bogus'"), ConfigError);
  CHECK_THROWS_WITH_AS(with(R"({"seed":1,"dataset":{"kind":"polynomial_stream","bogus":1},
      "model":{"kind":"linear_regression"},
      "policy":{"kind":"fixed","n":8},"max_iterations":5,"n_max":10})"),
                       doctest::Contains("dataset.bogus"), ConfigError);
  CHECK_THROWS_WITH_AS(with(R"({"seed":1,"dataset":{"kind":"polynomial_stream"},
      "model":{"kind":"linear_regression","extra":true},
      "policy":{"kind":"fixed","n":8},"max_iterations":5,"n_max":10})"),
                       doctest::Contains("model.extra"), ConfigError);
  CHECK_THROWS_WITH_AS(with(R"({"seed":1,"dataset":{"kind":"polynomial_stream"},
      "model":{"kind":"linear_regression"},
      "policy":{"kind":"fixed","n":8,"gamma":0.5},"max_iterations":5,"n_max":10})"),
                       doctest::Contains("policy.gamma"), ConfigError);
  CHECK_THROWS_WITH_AS(with(R"({"seed":1,"dataset":{"kind":"polynomial_stream"},
      "model":{"kind":"linear_regression"},"step_rule":{"kind":"constant","lr":0.1},
      "policy":{"kind":"fixed","n":8},"max_iterations":5,"n_max":10})"),
                       doctest::Contains("step_rule.lr"), ConfigError);
}

TEST_CASE("config parsing: missing required fields are named") {
  CHECK_THROWS_WITH_AS(parse_run_config_text(R"({"dataset":{"kind":"polynomial_stream"},
      "model":{"kind":"linear_regression"},"policy":{"kind":"fixed","n":8},
      "max_iterations":5})"),
                       doctest::Contains("seed"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_run_config_text(R"({"seed":1,
      "model":{"kind":"linear_regression"},"policy":{"kind":"fixed","n":8},
      "max_iterations":5})"),
                       doctest::Contains("dataset"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_run_config_text(R"({"seed":1,
      "dataset":{"kind":"polynomial_stream"},"policy":{"kind":"fixed","n":8},
      "max_iterations":5})"),
                       doctest::Contains("model"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_run_config_text(R"({"seed":1,
      "dataset":{"kind":"polynomial_stream"},"model":{"kind":"linear_regression"},
      "max_iterations":5})"),
                       doctest::Contains("'policy'"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_run_config_text(R"({"seed":1,
      "dataset":{"kind":"idx","labels":"l.idx"},"model":{"kind":"logistic_regression"},
      "policy":{"kind":"fixed","n":8},"max_iterations":5})"),
                       doctest::Contains("dataset.images"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_run_config_text(R"({"seed":1,
      "dataset":{"kind":"polynomial_stream"},"model":{"kind":"linear_regression"},
      "policy":{"kind":"lpast","delta":0.1},"max_iterations":5})"),
                       doctest::Contains("policy.bound"), ConfigError);
}

TEST_CASE("config parsing: type and range validation") {
  CHECK_THROWS_AS(parse_run_config_text("not json at all"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_run_config_text("[1,2,3]"), doctest::Contains("object"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_run_config_text(R"({"seed":"seven",
      "dataset":{"kind":"polynomial_stream"},"model":{"kind":"linear_regression"},
      "policy":{"kind":"fixed","n":8},"max_iterations":5,"n_max":10})"),
                       doctest::Contains("seed"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_run_config_text(R"({"seed":1,"delta":1.5,
      "dataset":{"kind":"polynomial_stream"},"model":{"kind":"linear_regression"},
      "policy":{"kind":"fixed","n":8},"max_iterations":5,"n_max":10})"),
                       doctest::Contains("delta"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_run_config_text(R"({"seed":1,"initial_n":2.5,
      "dataset":{"kind":"polynomial_stream"},"model":{"kind":"linear_regression"},
      "policy":{"kind":"fixed","n":8},"max_iterations":5,"n_max":10})"),
                       doctest::Contains("initial_n"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_run_config_text(R"({"seed":1,
      "dataset":{"kind":"teapot"},"model":{"kind":"linear_regression"},
      "policy":{"kind":"fixed","n":8},"max_iterations":5,"n_max":10})"),
                       doctest::Contains("dataset.kind"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_run_config_text(R"({"seed":1,
      "dataset":{"kind":"polynomial_stream"},"model":{"kind":"linear_regression"},
      "policy":{"kind":"lpast","bound":"gaussian","delta":0.1},
      "max_iterations":5,"n_max":10})"),
                       doctest::Contains("hoeffding, chebyshev, bernstein"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_run_config_text(R"({"seed":1,
      "dataset":{"kind":"csv_regression","path":"p.csv","target_column":"y",
                 "feature_columns":["a"],"test_fraction":1.0},
      "model":{"kind":"linear_regression"},
      "policy":{"kind":"fixed","n":8},"max_iterations":5})"),
                       doctest::Contains("test_fraction"), ConfigError);
}

TEST_CASE("config parsing: policy confidence falls back to the top-level delta") {
  RunSpec spec = parse_run_config_text(R"({
    "seed": 1, "delta": 0.25,
    "dataset": {"kind": "polynomial_stream"},
    "model": {"kind": "linear_regression"},
    "policies": [
      {"kind": "lpast", "bound": "hoeffding"},
      {"kind": "qpast", "bound": "chebyshev"},
      {"kind": "dsg"},
      {"kind": "dsg", "gamma": 0.5},
      {"kind": "lpast", "bound": "bernstein", "delta": 0.4}
    ],
    "max_iterations": 5, "n_max": 10})");
  REQUIRE(spec.policies.size() == 5);
  CHECK(std::get<LpastPolicy>(spec.policies[0].policy).delta == 0.25);
  CHECK(std::get<QpastPolicy>(spec.policies[1].policy).delta == 0.25);
  // Derived noise ceiling: gamma = sqrt(4 * 0.25 / 9) = 1/3.
  const auto& dsg_derived = std::get<DsgPolicy>(spec.policies[2].policy);
  CHECK(dsg_derived.gamma == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK_FALSE(spec.policies[2].gamma_explicit);
  CHECK(std::get<DsgPolicy>(spec.policies[3].policy).gamma == 0.5);
  CHECK(spec.policies[3].gamma_explicit);
  CHECK(std::get<LpastPolicy>(spec.policies[4].policy).delta == 0.4);

  CHECK_THROWS_WITH_AS(parse_run_config_text(R"({"seed":1,
      "dataset":{"kind":"polynomial_stream"},"model":{"kind":"linear_regression"},
      "policy":{"kind":"lpast","bound":"hoeffding"},"max_iterations":5,"n_max":10})"),
                       doctest::Contains("no top-level delta"), ConfigError);
}

TEST_CASE("config parsing: structural conflicts") {
  CHECK_THROWS_WITH_AS(parse_run_config_text(R"({"seed":1,
      "dataset":{"kind":"polynomial_stream"},"model":{"kind":"linear_regression"},
      "policy":{"kind":"fixed","n":8},"policies":[{"kind":"fixed","n":8}],
      "max_iterations":5,"n_max":10})"),
                       doctest::Contains("not both"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_run_config_text(R"({"seed":1,
      "dataset":{"kind":"polynomial_stream"},"model":{"kind":"linear_regression"},
      "policies":[],"max_iterations":5,"n_max":10})"),
                       doctest::Contains("non-empty"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_run_config_text(R"({"seed":1,
      "dataset":{"kind":"polynomial_stream"},"model":{"kind":"linear_regression"},
      "policy":{"kind":"fixed","n":8},"epochs":2,"max_iterations":5,"n_max":10})"),
                       doctest::Contains("exactly one"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_run_config_text(R"({"seed":1,
      "dataset":{"kind":"polynomial_stream"},"model":{"kind":"linear_regression"},
      "policy":{"kind":"fixed","n":8},"n_max":10})"),
                       doctest::Contains("exactly one"), ConfigError);
  // Hidden layers belong to the mlp kind only, and the mlp must have some.
  CHECK_THROWS_WITH_AS(parse_run_config_text(R"({"seed":1,
      "dataset":{"kind":"polynomial_stream"},
      "model":{"kind":"linear_regression","hidden":[4]},
      "policy":{"kind":"fixed","n":8},"max_iterations":5,"n_max":10})"),
                       doctest::Contains("hidden"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_run_config_text(R"({"seed":1,
      "dataset":{"kind":"polynomial_stream"},"model":{"kind":"mlp"},
      "policy":{"kind":"fixed","n":8},"max_iterations":5,"n_max":10})"),
                       doctest::Contains("hidden"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_run_config_text(R"({"seed":1,
      "dataset":{"kind":"idx","images":"i.idx","labels":"l.idx","test_images":"t.idx"},
      "model":{"kind":"logistic_regression"},
      "policy":{"kind":"fixed","n":8},"max_iterations":5})"),
                       doctest::Contains("together"), ConfigError);
}

TEST_CASE("config files: read errors and round trip") {
  TempDir dir("experiment");
  CHECK_THROWS_WITH_AS(parse_run_config_file(dir.file("absent.json")),
                       doctest::Contains("cannot open"), ConfigError);
  {
    std::ofstream out(dir.file("bad.json"));
    out << "{ definitely not json";
  }
  CHECK_THROWS_WITH_AS(parse_run_config_file(dir.file("bad.json")),
                       doctest::Contains("invalid JSON"), ConfigError);
  {
    std::ofstream out(dir.file("ok.json"));
    out << kMinimalStream;
  }
  RunSpec spec = parse_run_config_file(dir.file("ok.json"));
  CHECK(spec.seed == 7);
}

TEST_CASE("data paths: environment-relative resolution") {
  const char* old = std::getenv("PASTSGD_DATA_DIR");
  std::string saved = old ? old : "";

  setenv("PASTSGD_DATA_DIR", "/data/root", 1);
  CHECK(dataset_root() == "/data/root");
  CHECK(resolve_data_path("file.csv") == "/data/root/file.csv");
  CHECK(resolve_data_path("/abs/file.csv") == "/abs/file.csv");

  unsetenv("PASTSGD_DATA_DIR");
  CHECK(dataset_root().empty());
  CHECK(resolve_data_path("file.csv") == "file.csv");

  if (old)
    setenv("PASTSGD_DATA_DIR", saved.c_str(), 1);
  else
    unsetenv("PASTSGD_DATA_DIR");
}

TEST_CASE("run execution: stream run writes a deterministic metrics file") {
  TempDir dir("experiment");
  RunSpec spec = stream_spec(21, 60);
  RunSummary s = execute_run(spec, dir.file("out-a.csv"));
  CHECK(s.policy == "lpast-bernstein");
  CHECK(s.metric_name == "none");  // streams carry no held-out set
  CHECK(s.iterations == 60);
  CHECK(s.samples > 0);
  CHECK(s.output_path == dir.file("out-a.csv"));

  std::string a = read_file_bytes(dir.file("out-a.csv"));
  CHECK(a.rfind("iteration,epoch,samples_seen_total,batch_size,loss,eval_metric,grad_norm,"
                "var_l1,noise_to_signal,upsilon,bound\n",
                0) == 0);
  CHECK(std::count(a.begin(), a.end(), '\n') == 61);

  execute_run(spec, dir.file("out-b.csv"));
  CHECK(read_file_bytes(dir.file("out-b.csv")) == a);

  // A different seed changes the trace.
  RunSpec other = stream_spec(22, 60);
  execute_run(other, dir.file("out-c.csv"));
  CHECK(read_file_bytes(dir.file("out-c.csv")) != a);

  // The config's own output path is honoured when no override is given.
  RunSpec with_out = stream_spec(21, 10);
  with_out.output = dir.file("from-config.csv");
  RunSummary s2 = execute_run(with_out);
  CHECK(s2.output_path == dir.file("from-config.csv"));
  CHECK(read_file_bytes(dir.file("from-config.csv")).size() > 0);

  RunSpec multi = stream_spec(21, 10);
  multi.policies.push_back(PolicyConfig{FixedPolicy{8}, false});
  CHECK_THROWS_WITH_AS(execute_run(multi, dir.file("never.csv")),
                       doctest::Contains("exactly one"), ConfigError);
}

TEST_CASE("run execution: csv dataset trains and scores r2") {
  TempDir dir("experiment");
  // y = 3x - 1 with light noise; easily fit by one weight and a bias.
  Dataset table;
  table.task = TaskKind::Regression;
  table.num_rows = 60;
  table.num_cols = 1;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> xd(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.05);
  for (long i = 0; i < 60; ++i) {
    double x = xd(rng);
    table.features.push_back(x);
    table.targets.push_back(3.0 * x - 1.0 + noise(rng));
  }
  write_csv_regression(dir.file("line.csv"), table, "y", {"x"});

  RunSpec spec;
  spec.experiment = "csv-unit";
  spec.seed = 33;
  CsvDatasetSpec ds;
  ds.path = dir.file("line.csv");
  ds.target_column = "y";
  ds.feature_columns = {"x"};
  ds.test_fraction = 0.2;
  spec.dataset = ds;
  spec.model.kind = "linear_regression";
  spec.policies.push_back(PolicyConfig{FixedPolicy{12}, false});
  spec.step_rule = ConstantStepSpec{0.1};
  spec.initial_n = 12;
  spec.epochs = 40;
  spec.n_min = 1;

  RunSummary s = execute_run(spec, dir.file("line-metrics.csv"));
  CHECK(s.metric_name == "r2");
  CHECK(s.final_metric > 0.9);
  CHECK(s.samples >= 40 * 48);  // epochs count only the training split

  // Model kind and dataset task must agree.
  RunSpec clash = spec;
  clash.model.kind = "logistic_regression";
  CHECK_THROWS_WITH_AS(execute_run(clash, dir.file("never.csv")),
                       doctest::Contains("classification"), ConfigError);
}

TEST_CASE("run execution: idx dataset trains a classifier") {
  TempDir dir("experiment");
  // Two 2x2 patterns with distinct labels, four copies each.
  std::vector<std::uint8_t> pixels, labels;
  for (int i = 0; i < 8; ++i) {
    bool hot = i % 2 == 0;
    pixels.insert(pixels.end(),
                  {std::uint8_t(hot ? 200 : 10), std::uint8_t(10), std::uint8_t(10),
                   std::uint8_t(hot ? 10 : 200)});
    labels.push_back(std::uint8_t(hot ? 0 : 1));
  }
  write_idx(dir.file("img.idx"), dir.file("lab.idx"), pixels, labels, 8, 2, 2);

  RunSpec spec;
  spec.experiment = "idx-unit";
  spec.seed = 44;
  IdxDatasetSpec ds;
  ds.images = dir.file("img.idx");
  ds.labels = dir.file("lab.idx");
  ds.test_images = dir.file("img.idx");
  ds.test_labels = dir.file("lab.idx");
  spec.dataset = ds;
  spec.model.kind = "logistic_regression";
  spec.policies.push_back(PolicyConfig{FixedPolicy{8}, false});
  spec.step_rule = ConstantStepSpec{0.5};
  spec.initial_n = 8;
  spec.epochs = 30;
  spec.n_min = 1;

  RunSummary s = execute_run(spec, dir.file("idx-metrics.csv"));
  CHECK(s.metric_name == "accuracy");
  CHECK(s.final_metric == 1.0);  // trivially separable patterns

  RunSpec clash = spec;
  clash.model.kind = "linear_regression";
  CHECK_THROWS_WITH_AS(execute_run(clash, dir.file("never.csv")),
                       doctest::Contains("regression"), ConfigError);
}

TEST_CASE("sweep execution: one row per delta, one column pair per policy") {
  TempDir dir("experiment");
  RunSpec spec = stream_spec(50, 25);
  spec.policies.push_back(PolicyConfig{FixedPolicy{16}, false});

  std::string path = execute_sweep(spec, {0.1, 0.25}, dir.file("sweep.csv"));
  CHECK(path == dir.file("sweep.csv"));
  std::string text = read_file_bytes(path);
  CHECK(text.rfind("delta,lpast-bernstein_metric,lpast-bernstein_iterations,"
                   "fixed_metric,fixed_iterations\n",
                   0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  CHECK(text.find("\n0.1", 0) != std::string::npos);

  CHECK_THROWS_WITH_AS(execute_sweep(spec, {}, dir.file("s2.csv")), doctest::Contains("empty"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(execute_sweep(spec, {0.1, 1.5}, dir.file("s3.csv")),
                       doctest::Contains("outside"), ConfigError);

  // A single-cell sweep reports the same iteration count as a direct run.
  RunSpec single = stream_spec(50, 25);
  std::string cell_path = execute_sweep(single, {0.1}, dir.file("cell.csv"));
  RunSummary direct = execute_run(single, dir.file("direct.csv"));
  std::string cell_text = read_file_bytes(cell_path);
  std::size_t line_start = cell_text.find('\n') + 1;
  std::string row = cell_text.substr(line_start);
  std::size_t last_comma = row.rfind(',');
  long sweep_iters = std::stol(row.substr(last_comma + 1));
  CHECK(sweep_iters == direct.iterations);
}

TEST_CASE("verification suite: all checks pass and the report is stable") {
  std::vector<VerifyCheck> checks = run_verification(12345);
  CHECK(all_pass(checks));
  CHECK(checks.size() >= 12);
  for (const VerifyCheck& c : checks) {
    CAPTURE(c.name);
    CHECK(c.pass);
  }

  std::string report = verification_report_json(checks);
  CHECK(report.find("hoeffding") != std::string::npos);
  CHECK(report.find("chebyshev") != std::string::npos);
  CHECK(report.find("bernstein") != std::string::npos);
  CHECK(report.find("\"all_pass\": true") != std::string::npos);
  CHECK(verification_report_json(run_verification(12345)) == report);

  std::vector<VerifyCheck> mixed = checks;
  mixed.push_back({"synthetic_failure", 1.0, 0.0, false});
  CHECK_FALSE(all_pass(mixed));
}

#ifdef PASTSGD_CLI_PATH
#include <sys/wait.h>

namespace {

int run_cli(const std::string& args) {
  std::string cmd = std::string(PASTSGD_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("command line: exit codes for success, config and data errors") {
  TempDir dir("experiment");
  CHECK(run_cli("verify --seed 3") == 0);

  {
    std::ofstream out(dir.file("run.json"));
    out << R"({"seed": 9, "dataset": {"kind": "polynomial_stream"},
               "model": {"kind": "linear_regression"},
               "policy": {"kind": "lpast", "bound": "bernstein", "delta": 0.1},
               "max_iterations": 20, "n_max": 200})";
  }
  CHECK(run_cli("run --config " + dir.file("run.json") + " --output " + dir.file("m.csv")) == 0);
  std::string metrics = read_file_bytes(dir.file("m.csv"));
  CHECK(std::count(metrics.begin(), metrics.end(), '\n') == 21);

  // Unknown keys are a configuration error.
  {
    std::ofstream out(dir.file("bad.json"));
    out << R"({"seed": 9, "bogus": 1, "dataset": {"kind": "polynomial_stream"},
               "model": {"kind": "linear_regression"},
               "policy": {"kind": "fixed", "n": 4}, "max_iterations": 5, "n_max": 10})";
  }
  CHECK(run_cli("run --config " + dir.file("bad.json")) == 2);
  CHECK(run_cli("run --config " + dir.file("missing.json")) == 2);

  // Unreadable datasets are a data error.
  {
    std::ofstream out(dir.file("nodata.json"));
    out << R"({"seed": 9, "dataset": {"kind": "idx", "images": ")" << dir.file("no.idx")
        << R"(", "labels": ")" << dir.file("no2.idx") << R"("},
               "model": {"kind": "logistic_regression"},
               "policy": {"kind": "fixed", "n": 4}, "max_iterations": 5})";
  }
  CHECK(run_cli("run --config " + dir.file("nodata.json")) == 3);

  // Sweep over two confidence levels.
  CHECK(run_cli("sweep --config " + dir.file("run.json") + " --deltas 0.1,0.25 --output " +
                dir.file("sw.csv")) == 0);
  std::string sweep = read_file_bytes(dir.file("sw.csv"));
  CHECK(std::count(sweep.begin(), sweep.end(), '\n') == 3);
}
#endif  // PASTSGD_CLI_PATH
