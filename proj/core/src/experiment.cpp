#include "pastsgd/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "pastsgd/errors.hpp"
#include "pastsgd/oracle.hpp"

namespace pastsgd {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError("config: " + (path.empty() ? msg : path + ": " + msg));
}

std::string join_path(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void reject_unknown(const json& obj, const std::string& path,
                    std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* a : allowed)
      if (item.key() == a) {
        known = true;
        break;
      }
    if (!known) throw ConfigError("config: unknown key '" + join_path(path, item.key()) + "'");
  }
}

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const json& require_field(const json& obj, const std::string& path, const char* key) {
  const json* v = find(obj, key);
  if (!v) fail(join_path(path, key), "missing required field");
  return *v;
}

std::string get_str(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

bool get_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, "expected a boolean");
  return v.get<bool>();
}

long get_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<long>();
}

double get_num(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

std::uint64_t get_seed(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    long s = v.get<long>();
    if (s < 0) fail(path, "seed must be non-negative");
    return std::uint64_t(s);
  }
  fail(path, "expected an integer seed");
}

double get_delta(const json& v, const std::string& path) {
  double d = get_num(v, path);
  if (!(d > 0.0 && d < 1.0)) fail(path, "confidence must lie in (0,1)");
  return d;
}

DatasetSpecVar parse_dataset(const json& obj, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  std::string kind = get_str(require_field(obj, path, "kind"), join_path(path, "kind"));
  if (kind == "idx") {
    reject_unknown(obj, path,
                   {"kind", "images", "labels", "test_images", "test_labels", "subset",
                    "test_subset", "scale_to_unit"});
    IdxDatasetSpec ds;
    ds.images = get_str(require_field(obj, path, "images"), join_path(path, "images"));
    ds.labels = get_str(require_field(obj, path, "labels"), join_path(path, "labels"));
    if (const json* v = find(obj, "test_images"))
      ds.test_images = get_str(*v, join_path(path, "test_images"));
    if (const json* v = find(obj, "test_labels"))
      ds.test_labels = get_str(*v, join_path(path, "test_labels"));
    if (ds.test_images.empty() != ds.test_labels.empty())
      fail(path, "test_images and test_labels must be given together");
    if (const json* v = find(obj, "subset")) {
      ds.subset = get_int(*v, join_path(path, "subset"));
      if (ds.subset < 0) fail(join_path(path, "subset"), "must be >= 0");
    }
    if (const json* v = find(obj, "test_subset")) {
      ds.test_subset = get_int(*v, join_path(path, "test_subset"));
      if (ds.test_subset < 0) fail(join_path(path, "test_subset"), "must be >= 0");
    }
    if (const json* v = find(obj, "scale_to_unit"))
      ds.scale_to_unit = get_bool(*v, join_path(path, "scale_to_unit"));
    return ds;
  }
  if (kind == "csv_regression") {
    reject_unknown(obj, path,
                   {"kind", "path", "target_column", "feature_columns", "normalize",
                    "test_fraction", "split_seed"});
    CsvDatasetSpec ds;
    ds.path = get_str(require_field(obj, path, "path"), join_path(path, "path"));
    ds.target_column =
        get_str(require_field(obj, path, "target_column"), join_path(path, "target_column"));
    const json& cols = require_field(obj, path, "feature_columns");
    if (!cols.is_array() || cols.empty())
      fail(join_path(path, "feature_columns"), "expected a non-empty array of column names");
    for (std::size_t i = 0; i < cols.size(); ++i)
      ds.feature_columns.push_back(
          get_str(cols[i], join_path(path, "feature_columns[" + std::to_string(i) + "]")));
    if (const json* v = find(obj, "normalize"))
      ds.normalize = get_bool(*v, join_path(path, "normalize"));
    if (const json* v = find(obj, "test_fraction")) {
      ds.test_fraction = get_num(*v, join_path(path, "test_fraction"));
      if (!(ds.test_fraction >= 0.0 && ds.test_fraction < 1.0))
        fail(join_path(path, "test_fraction"), "must lie in [0,1)");
    }
    if (const json* v = find(obj, "split_seed"))
      ds.split_seed = get_seed(*v, join_path(path, "split_seed"));
    return ds;
  }
  if (kind == "polynomial_stream") {
    reject_unknown(obj, path, {"kind", "degree", "noise_sigma", "change_period"});
    StreamDatasetSpec ds;
    if (const json* v = find(obj, "degree")) {
      ds.degree = int(get_int(*v, join_path(path, "degree")));
      if (ds.degree < 1) fail(join_path(path, "degree"), "must be >= 1");
    }
    if (const json* v = find(obj, "noise_sigma")) {
      ds.noise_sigma = get_num(*v, join_path(path, "noise_sigma"));
      if (ds.noise_sigma < 0.0) fail(join_path(path, "noise_sigma"), "must be >= 0");
    }
    if (const json* v = find(obj, "change_period")) {
      ds.change_period = get_int(*v, join_path(path, "change_period"));
      if (ds.change_period < 1) fail(join_path(path, "change_period"), "must be >= 1");
    }
    return ds;
  }
  fail(join_path(path, "kind"),
       "'" + kind + "' is not one of idx, csv_regression, polynomial_stream");
}

ModelConfig parse_model(const json& obj, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  reject_unknown(obj, path, {"kind", "hidden"});
  ModelConfig mc;
  mc.kind = get_str(require_field(obj, path, "kind"), join_path(path, "kind"));
  if (mc.kind != "linear_regression" && mc.kind != "logistic_regression" && mc.kind != "mlp")
    fail(join_path(path, "kind"),
         "'" + mc.kind + "' is not one of linear_regression, logistic_regression, mlp");
  if (const json* v = find(obj, "hidden")) {
    if (mc.kind != "mlp") fail(join_path(path, "hidden"), "only valid for kind 'mlp'");
    if (!v->is_array() || v->empty())
      fail(join_path(path, "hidden"), "expected a non-empty array of layer sizes");
    for (std::size_t i = 0; i < v->size(); ++i) {
      long h = get_int((*v)[i], join_path(path, "hidden[" + std::to_string(i) + "]"));
      if (h < 1) fail(join_path(path, "hidden[" + std::to_string(i) + "]"), "must be >= 1");
      mc.hidden.push_back(h);
    }
  }
  if (mc.kind == "mlp" && mc.hidden.empty())
    fail(join_path(path, "hidden"), "mlp requires at least one hidden layer size");
  return mc;
}

BoundKind parse_bound_kind(const json& v, const std::string& path) {
  std::string name = get_str(v, path);
  auto kind = bound_kind_from_string(name);
  if (!kind) fail(path, "'" + name + "' is not one of hoeffding, chebyshev, bernstein");
  return *kind;
}

PolicyConfig parse_policy(const json& obj, const std::string& path,
                          std::optional<double> default_delta) {
  if (!obj.is_object()) fail(path, "expected an object");
  std::string kind = get_str(require_field(obj, path, "kind"), join_path(path, "kind"));
  PolicyConfig pc;
  auto resolve_delta = [&](const char* key) -> double {
    if (const json* v = find(obj, key)) return get_delta(*v, join_path(path, key));
    if (default_delta) return *default_delta;
    fail(join_path(path, key), "missing and no top-level delta to fall back on");
  };
  if (kind == "fixed") {
    reject_unknown(obj, path, {"kind", "n"});
    FixedPolicy p;
    p.n = get_int(require_field(obj, path, "n"), join_path(path, "n"));
    if (p.n < 1) fail(join_path(path, "n"), "must be >= 1");
    pc.policy = p;
    return pc;
  }
  if (kind == "dsg") {
    reject_unknown(obj, path, {"kind", "gamma"});
    DsgPolicy p;
    if (const json* v = find(obj, "gamma")) {
      p.gamma = get_num(*v, join_path(path, "gamma"));
      if (!(p.gamma > 0.0 && p.gamma < 1.0)) fail(join_path(path, "gamma"), "must lie in (0,1)");
      pc.gamma_explicit = true;
    } else {
      // noise ceiling matched to the confidence level of the variance bound
      double delta = resolve_delta("gamma");
      p.gamma = std::sqrt(4.0 * delta / 9.0);
    }
    pc.policy = p;
    return pc;
  }
  if (kind == "lpast" || kind == "qpast") {
    reject_unknown(obj, path, {"kind", "bound", "delta"});
    BoundKind bk = parse_bound_kind(require_field(obj, path, "bound"), join_path(path, "bound"));
    double delta = resolve_delta("delta");
    if (kind == "lpast")
      pc.policy = LpastPolicy{bk, delta};
    else
      pc.policy = QpastPolicy{bk, delta};
    return pc;
  }
  fail(join_path(path, "kind"), "'" + kind + "' is not one of fixed, dsg, lpast, qpast");
}

StepRuleSpec parse_step_rule(const json& obj, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  std::string kind = get_str(require_field(obj, path, "kind"), join_path(path, "kind"));
  if (kind == "constant") {
    reject_unknown(obj, path, {"kind", "eta"});
    ConstantStepSpec s;
    if (const json* v = find(obj, "eta")) {
      s.eta = get_num(*v, join_path(path, "eta"));
      if (!(s.eta > 0.0)) fail(join_path(path, "eta"), "must be positive");
    }
    return s;
  }
  if (kind == "rmsprop") {
    reject_unknown(obj, path, {"kind", "lr", "rho", "epsilon"});
    RmspropStepSpec s;
    if (const json* v = find(obj, "lr")) {
      s.lr = get_num(*v, join_path(path, "lr"));
      if (!(s.lr > 0.0)) fail(join_path(path, "lr"), "must be positive");
    }
    if (const json* v = find(obj, "rho")) {
      s.rho = get_num(*v, join_path(path, "rho"));
      if (!(s.rho > 0.0 && s.rho < 1.0)) fail(join_path(path, "rho"), "must lie in (0,1)");
    }
    if (const json* v = find(obj, "epsilon")) {
      s.epsilon = get_num(*v, join_path(path, "epsilon"));
      if (!(s.epsilon > 0.0)) fail(join_path(path, "epsilon"), "must be positive");
    }
    return s;
  }
  fail(join_path(path, "kind"), "'" + kind + "' is not one of constant, rmsprop");
}

}  // namespace

RunSpec parse_run_config_text(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config: top level must be an object");
  reject_unknown(root, "",
                 {"experiment", "seed", "delta", "dataset", "model", "policy", "policies",
                  "step_rule", "initial_n", "epochs", "max_iterations", "n_min", "n_max",
                  "eval_every", "range_override", "output"});

  RunSpec spec;
  if (const json* v = find(root, "experiment")) spec.experiment = get_str(*v, "experiment");
  if (spec.experiment.empty()) spec.experiment = "run";
  spec.seed = get_seed(require_field(root, "", "seed"), "seed");
  if (const json* v = find(root, "delta")) spec.delta = get_delta(*v, "delta");
  spec.dataset = parse_dataset(require_field(root, "", "dataset"), "dataset");
  spec.model = parse_model(require_field(root, "", "model"), "model");

  const json* single = find(root, "policy");
  const json* list = find(root, "policies");
  if (single && list) throw ConfigError("config: give either 'policy' or 'policies', not both");
  if (!single && !list) throw ConfigError("config: missing required field 'policy'");
  if (single) {
    spec.policies.push_back(parse_policy(*single, "policy", spec.delta));
  } else {
    if (!list->is_array() || list->empty())
      throw ConfigError("config: policies: expected a non-empty array");
    for (std::size_t i = 0; i < list->size(); ++i)
      spec.policies.push_back(
          parse_policy((*list)[i], "policies[" + std::to_string(i) + "]", spec.delta));
  }

  if (const json* v = find(root, "step_rule")) spec.step_rule = parse_step_rule(*v, "step_rule");
  if (const json* v = find(root, "initial_n")) {
    spec.initial_n = get_int(*v, "initial_n");
    if (spec.initial_n < 1) throw ConfigError("config: initial_n: must be >= 1");
  }
  if (const json* v = find(root, "epochs")) {
    spec.epochs = get_int(*v, "epochs");
    if (*spec.epochs < 1) throw ConfigError("config: epochs: must be >= 1");
  }
  if (const json* v = find(root, "max_iterations")) {
    spec.max_iterations = get_int(*v, "max_iterations");
    if (*spec.max_iterations < 1) throw ConfigError("config: max_iterations: must be >= 1");
  }
  if (spec.epochs.has_value() == spec.max_iterations.has_value())
    throw ConfigError("config: exactly one of epochs / max_iterations must be set");
  if (const json* v = find(root, "n_min")) {
    spec.n_min = get_int(*v, "n_min");
    if (spec.n_min < 1) throw ConfigError("config: n_min: must be >= 1");
  }
  if (const json* v = find(root, "n_max")) {
    spec.n_max = get_int(*v, "n_max");
    if (*spec.n_max < 1) throw ConfigError("config: n_max: must be >= 1");
  }
  if (const json* v = find(root, "eval_every")) {
    spec.eval_every = get_int(*v, "eval_every");
    if (spec.eval_every < 0) throw ConfigError("config: eval_every: must be >= 0");
  }
  if (const json* v = find(root, "range_override")) {
    spec.range_override = get_num(*v, "range_override");
    if (!(*spec.range_override > 0.0)) throw ConfigError("config: range_override: must be positive");
  }
  if (const json* v = find(root, "output")) spec.output = get_str(*v, "output");
  return spec;
}

RunSpec parse_run_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config_text(ss.str());
}

std::string dataset_root() {
  const char* env = std::getenv("PASTSGD_DATA_DIR");
  return env ? env : "";
}

std::string resolve_data_path(const std::string& path) {
  if (path.empty() || path.front() == '/') return path;
  std::string root = dataset_root();
  if (root.empty()) return path;
  if (root.back() != '/') root += '/';
  return root + path;
}

namespace {

struct AssembledData {
  std::unique_ptr<Dataset> train;  // null for stream sources
  std::unique_ptr<Dataset> test;
  std::unique_ptr<BatchSource> source;
  ModelSpec model = LinearRegressionSpec{1};
  std::optional<ChangeSchedule> schedule;
  std::string metric_name = "none";
};

ModelSpec resolve_model(const ModelConfig& mc, TaskKind task, long in_dim, long classes) {
  if (mc.kind == "linear_regression") {
    if (task != TaskKind::Regression)
      throw ConfigError("config: model.kind: linear_regression needs a regression dataset");
    return LinearRegressionSpec{in_dim};
  }
  if (task != TaskKind::Classification)
    throw ConfigError("config: model.kind: " + mc.kind + " needs a classification dataset");
  if (classes < 2)
    throw ConfigError("config: dataset provides fewer than 2 classes");
  if (mc.kind == "logistic_regression") return LogisticRegressionSpec{in_dim, classes};
  return MlpSpec{in_dim, mc.hidden, classes};
}

AssembledData assemble(const RunSpec& spec) {
  AssembledData out;
  if (const auto* idx = std::get_if<IdxDatasetSpec>(&spec.dataset)) {
    out.train = std::make_unique<Dataset>(load_idx(resolve_data_path(idx->images),
                                                   resolve_data_path(idx->labels), idx->subset,
                                                   idx->scale_to_unit));
    if (!idx->test_images.empty())
      out.test = std::make_unique<Dataset>(load_idx(resolve_data_path(idx->test_images),
                                                    resolve_data_path(idx->test_labels),
                                                    idx->test_subset, idx->scale_to_unit));
    out.model = resolve_model(spec.model, TaskKind::Classification, out.train->num_cols,
                              out.train->num_classes);
    out.metric_name = "accuracy";
    out.source = std::make_unique<SequentialDatasetSource>(*out.train);
    return out;
  }
  if (const auto* csv = std::get_if<CsvDatasetSpec>(&spec.dataset)) {
    Dataset full = load_csv_regression(resolve_data_path(csv->path), csv->target_column,
                                       csv->feature_columns, /*normalize=*/false);
    if (csv->test_fraction > 0.0) {
      auto [train, test] = train_test_split(full, 1.0 - csv->test_fraction,
                                            csv->split_seed.value_or(spec.seed));
      out.train = std::make_unique<Dataset>(std::move(train));
      out.test = std::make_unique<Dataset>(std::move(test));
    } else {
      out.train = std::make_unique<Dataset>(std::move(full));
    }
    if (csv->normalize) {
      NormalizationSpec norm = fit_feature_standardization(*out.train);
      standardize_features(*out.train, norm);
      if (out.test) standardize_features(*out.test, norm);
    }
    out.model =
        resolve_model(spec.model, TaskKind::Regression, out.train->num_cols, 0);
    out.metric_name = "r2";
    out.source = std::make_unique<SequentialDatasetSource>(*out.train);
    return out;
  }
  const auto& st = std::get<StreamDatasetSpec>(spec.dataset);
  out.model = resolve_model(spec.model, TaskKind::Regression, long(st.degree) + 1, 0);
  out.schedule = ChangeSchedule{st.change_period};
  out.source = std::make_unique<PolynomialStreamSource>(
      synth_polynomial_stream(spec.seed, st.degree, st.noise_sigma, st.change_period));
  return out;
}

TrainConfig make_train_config(const RunSpec& spec, const BatchPolicy& policy,
                              const AssembledData& data) {
  TrainConfig cfg;
  cfg.policy = policy;
  cfg.step_rule = spec.step_rule;
  cfg.model = data.model;
  cfg.initial_n = spec.initial_n;
  cfg.epochs = spec.epochs;
  cfg.max_iterations = spec.max_iterations;
  cfg.seed = spec.seed;
  cfg.change_schedule = data.schedule;
  cfg.n_min = spec.n_min;
  cfg.n_max = spec.n_max;
  cfg.eval_every = spec.eval_every;
  cfg.range_override = spec.range_override;
  return cfg;
}

BatchPolicy policy_at_delta(const PolicyConfig& pc, double delta) {
  BatchPolicy p = pc.policy;
  if (auto* lp = std::get_if<LpastPolicy>(&p)) {
    lp->delta = delta;
  } else if (auto* qp = std::get_if<QpastPolicy>(&p)) {
    qp->delta = delta;
  } else if (auto* dsg = std::get_if<DsgPolicy>(&p)) {
    if (!pc.gamma_explicit) dsg->gamma = std::sqrt(4.0 * delta / 9.0);
  }
  return p;
}

}  // namespace

RunSummary execute_run(const RunSpec& spec, const std::string& output_override) {
  if (spec.policies.size() != 1)
    throw ConfigError("config: run needs exactly one policy, found " +
                      std::to_string(spec.policies.size()) + " (sweep handles lists)");
  AssembledData data = assemble(spec);
  TrainConfig cfg = make_train_config(spec, spec.policies.front().policy, data);
  RunResult res = run_training(cfg, *data.source, data.test.get());

  std::string out_path = !output_override.empty() ? output_override
                         : !spec.output.empty()   ? spec.output
                                                  : spec.experiment + "-metrics.csv";
  write_metrics_csv(out_path, res.records);

  RunSummary s;
  s.policy = policy_name(cfg.policy);
  s.metric_name = data.test ? data.metric_name : "none";
  s.final_metric = res.records.back().eval_metric;
  s.iterations = long(res.records.size());
  s.samples = res.records.back().samples_seen_total;
  s.output_path = out_path;
  return s;
}

std::string execute_sweep(const RunSpec& spec, const std::vector<double>& deltas,
                          const std::string& output_override) {
  if (deltas.empty()) throw ConfigError("sweep: the delta list is empty");
  for (double d : deltas)
    if (!(d > 0.0 && d < 1.0))
      throw ConfigError("sweep: delta " + std::to_string(d) + " outside (0,1)");
  if (spec.policies.empty()) throw ConfigError("sweep: no policies configured");

  std::string out_path = !output_override.empty() ? output_override : spec.experiment + "-sweep.csv";
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) throw DataError("sweep: cannot open " + out_path + " for writing");

  out << "delta";
  for (const PolicyConfig& pc : spec.policies) {
    std::string name = policy_name(pc.policy);
    out << ',' << name << "_metric," << name << "_iterations";
  }
  out << '\n';

  char buf[64];
  for (double delta : deltas) {
    std::snprintf(buf, sizeof buf, "%.17g", delta);
    out << buf;
    for (const PolicyConfig& pc : spec.policies) {
      AssembledData data = assemble(spec);
      TrainConfig cfg = make_train_config(spec, policy_at_delta(pc, delta), data);
      RunResult res = run_training(cfg, *data.source, data.test.get());
      std::snprintf(buf, sizeof buf, "%.17g", res.records.back().eval_metric);
      out << ',' << buf << ',' << res.records.size();
    }
    out << '\n';
  }
  if (!out) throw DataError("sweep: write failed for " + out_path);
  return out_path;
}

namespace {

double max_rel_err(std::span<const double> analytic, std::span<const double> numeric) {
  double scale = 1.0;
  for (double a : analytic) scale = std::max(scale, std::abs(a));
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i)
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
  return worst;
}

}  // namespace

std::vector<VerifyCheck> run_verification(std::uint64_t seed) {
  std::vector<VerifyCheck> checks;
  std::mt19937_64 rng(seed);
  const double deltas[] = {0.1, 0.25, 0.5};
  const long dims[] = {1, 10};

  // closed-form sizer vs exhaustive scan
  for (BoundKind kind : {BoundKind::Hoeffding, BoundKind::Chebyshev, BoundKind::Bernstein}) {
    std::uniform_real_distribution<double> g_dist(0.1, 10.0), l_dist(0.5, 20.0), v_dist(0.0, 5.0);
    const long scan_max = 20000;
    long mismatches = 0;
    for (int i = 0; i < 10; ++i) {
      double g = g_dist(rng), L = l_dist(rng);
      long d = dims[i % 2];
      double delta = deltas[i % 3];
      Vec var(std::size_t(d), 0.0);
      for (double& v : var) v = v_dist(rng);
      DistributionInfo info(L, var, d);
      auto objective = [&](long n) { return (g - vector_bound(kind, n, delta, info)) / double(n); };
      long oracle = brute_force_argmax(objective, scan_max).best_n;
      long closed = std::min(lpast_closed_form(kind, g, L, var, delta, d), scan_max);
      if (closed != oracle) ++mismatches;
    }
    checks.push_back({std::string("lpast_oracle_agreement_") + to_string(kind),
                      double(mismatches), 0.0, mismatches == 0});
  }

  // the three worked closed-form constants
  {
    double two_over_e = 2.0 / std::exp(1.0);
    long h = lpast_closed_form(BoundKind::Hoeffding, 1.0, 1.0, {}, two_over_e, 1);
    checks.push_back({"closed_form_constant_hoeffding", double(h), 18.0, h == 18});
    Vec var_c{4.0};
    long c = lpast_closed_form(BoundKind::Chebyshev, 3.0, 0.0, var_c, 0.25, 1);
    checks.push_back({"closed_form_constant_chebyshev", double(c), 4.0, c == 4});
    Vec var_b{2.0};
    long b = lpast_closed_form(BoundKind::Bernstein, 2.0, 3.0, var_b, two_over_e, 1);
    checks.push_back({"closed_form_constant_bernstein", double(b), 6.0, b == 6});
  }

  // empirical coverage of the deviation bounds
  {
    Vec lo(5, -0.5), hi(5, 1.5);
    UniformBoxSampler sampler(lo, hi);
    for (BoundKind kind : {BoundKind::Hoeffding, BoundKind::Chebyshev, BoundKind::Bernstein}) {
      double rate = monte_carlo_coverage(kind, sampler, 50, 0.25, 2000, rng());
      checks.push_back(
          {std::string("coverage_") + to_string(kind), rate, 0.25, rate <= 0.25});
    }
  }

  // analytic derivatives against central differences
  {
    struct Probe {
      const char* label;
      ModelSpec spec;
      bool hessian;
    };
    const Probe probes[] = {
        {"linear_regression", LinearRegressionSpec{3}, true},
        {"logistic_regression", LogisticRegressionSpec{4, 3}, true},
        {"mlp", MlpSpec{4, {6}, 3}, false},
    };
    std::normal_distribution<double> normal(0.0, 1.0);
    for (const Probe& probe : probes) {
      auto model = make_model(probe.spec);
      double worst_g = 0.0, worst_h = 0.0;
      for (int rep = 0; rep < 5; ++rep) {
        Vec theta(std::size_t(model->param_count()));
        for (double& t : theta) t = 0.5 * normal(rng);
        Vec x(std::size_t(model->input_dim()));
        for (double& f : x) f = normal(rng);
        double target = model->task() == TaskKind::Classification
                            ? double(rng() % std::uint64_t(model->num_classes()))
                            : normal(rng);
        Example ex{x, target};
        auto f = [&](std::span<const double> th) { return model->loss(th, ex); };
        Vec analytic = per_sample_gradient(*model, theta, ex);
        Vec numeric = fd_gradient(f, theta, 1e-5);
        worst_g = std::max(worst_g, max_rel_err(analytic, numeric));
        if (probe.hessian) {
          Vec ah = per_sample_hessian_diag(*model, theta, ex);
          Vec nh = fd_second_diag(f, theta, 1e-4);
          worst_h = std::max(worst_h, max_rel_err(ah, nh));
        }
      }
      checks.push_back({std::string("gradient_fd_") + probe.label, worst_g, 1e-6,
                        worst_g <= 1e-6});
      if (probe.hessian)
        checks.push_back({std::string("hessian_fd_") + probe.label, worst_h, 1e-4,
                          worst_h <= 1e-4});
    }
  }

  // noise-ratio rule vs the variance-only closed form on gamma^2 = 4*delta/9
  {
    std::uniform_real_distribution<double> g_dist(0.1, 10.0), v_dist(0.0, 5.0),
        d_dist(0.05, 0.95);
    long worst = 0;
    for (int i = 0; i < 100; ++i) {
      double g = g_dist(rng), v = v_dist(rng), delta = d_dist(rng);
      Vec var{v};
      double n_star = lpast_stationary_point(BoundKind::Chebyshev, g, 0.0, var, delta, 1);
      double noise_rule = v / ((4.0 * delta / 9.0) * (g * g));
      worst = std::max(worst, ulp_distance(n_star, noise_rule));
    }
    checks.push_back({"dsg_chebyshev_equivalence_ulp", double(worst), 1.0, worst <= 1});
  }

  return checks;
}

bool all_pass(const std::vector<VerifyCheck>& checks) {
  for (const VerifyCheck& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string verification_report_json(const std::vector<VerifyCheck>& checks) {
  json root;
  root["checks"] = json::array();
  for (const VerifyCheck& c : checks) {
    json item;
    item["name"] = c.name;
    item["observed"] = c.observed;
    item["threshold"] = c.threshold;
    item["pass"] = c.pass;
    root["checks"].push_back(item);
  }
  root["all_pass"] = all_pass(checks);
  return root.dump(2);
}

}  // namespace pastsgd
