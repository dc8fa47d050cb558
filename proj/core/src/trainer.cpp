#include "pastsgd/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "pastsgd/errors.hpp"

namespace pastsgd {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

SequentialDatasetSource::SequentialDatasetSource(const Dataset& ds) : ds_(&ds) {
  if (ds.num_rows == 0) throw std::invalid_argument("SequentialDatasetSource: empty dataset");
}

void SequentialDatasetSource::next_batch(long n, Vec& features, Vec& targets) {
  const long p = ds_->num_cols;
  features.resize(std::size_t(n) * std::size_t(p));
  targets.resize(std::size_t(n));
  for (long i = 0; i < n; ++i) {
    auto r = ds_->row(cursor_);
    std::copy(r.begin(), r.end(), features.begin() + std::size_t(i) * std::size_t(p));
    targets[std::size_t(i)] = ds_->targets[std::size_t(cursor_)];
    cursor_ = (cursor_ + 1) % ds_->num_rows;
  }
}

PolynomialStreamSource::PolynomialStreamSource(PolynomialStream stream)
    : stream_(std::move(stream)) {}

void PolynomialStreamSource::next_batch(long n, Vec& features, Vec& targets) {
  stream_.next_batch(n, features, targets);
}

namespace {

// Gradient statistics as the sizer should see them. With a per-parameter
// scale the statistics describe the scaled per-sample gradients eta*g
// (mean and variance rescale exactly), L picks up the largest scale entry,
// and the effective step inside the improvement formulas becomes 1.
struct SizerView {
  SizerContext ctx;
  double eta_eff = 1.0;
};

SizerView make_sizer_view(const BatchGradientStats& raw, const StepScale& scale, double L_run,
                          std::optional<BatchHessianDiagStats> hess,
                          std::optional<Vec> hess_range, long n_min, long n_max, long d) {
  SizerView view;
  if (scale.is_global()) {
    view.ctx.stats = raw;
    view.ctx.L = L_run;
    view.ctx.eta = scale;
    view.eta_eff = scale.global_eta();
  } else {
    auto eta = scale.entries();
    BatchGradientStats scaled;
    scaled.n = raw.n;
    scaled.mean.resize(raw.mean.size());
    for (std::size_t i = 0; i < raw.mean.size(); ++i) scaled.mean[i] = eta[i] * raw.mean[i];
    scaled.norm = l2_norm(scaled.mean);
    if (raw.variance) {
      Vec var(raw.variance->size());
      for (std::size_t i = 0; i < var.size(); ++i)
        var[i] = eta[i] * eta[i] * (*raw.variance)[i];
      scaled.variance = std::move(var);
    }
    view.ctx.stats = std::move(scaled);
    view.ctx.L = L_run * scale.max_entry();
    view.ctx.eta = StepScale::global(1.0);
    view.eta_eff = 1.0;
  }
  view.ctx.hess = std::move(hess);
  view.ctx.hessian_range = std::move(hess_range);
  view.ctx.n_min = n_min;
  view.ctx.n_max = n_max;
  view.ctx.d = d;
  return view;
}

// Improvement estimate and deviation bound of the active policy at the batch
// size actually used, for the iteration log. NaN where undefined.
void record_upsilon_bound(const BatchPolicy& policy, const SizerView& view, long n,
                          double& upsilon, double& bound) {
  upsilon = kNaN;
  bound = kNaN;
  const SizerContext& ctx = view.ctx;
  if (!(ctx.stats.norm > kDegenerateGradTol)) return;
  if (const auto* lp = std::get_if<LpastPolicy>(&policy)) {
    if (lp->kind != BoundKind::Hoeffding && !ctx.stats.has_variance()) return;
    DistributionInfo info = sizer_grad_info(lp->kind, ctx);
    bound = vector_bound(lp->kind, n, lp->delta, info);
    upsilon = upsilon_linear(view.eta_eff, ctx.stats.norm, bound);
  } else if (const auto* qp = std::get_if<QpastPolicy>(&policy)) {
    if (qp->kind != BoundKind::Hoeffding && !ctx.stats.has_variance()) return;
    if (!ctx.hess || !ctx.hessian_range) return;
    DistributionInfo info = sizer_grad_info(qp->kind, ctx);
    bound = vector_bound(qp->kind, n, qp->delta / 2.0, info);
    ShrunkHessianDiag shrunk = shrink_hessian_diag(
        *ctx.hess, qp->kind, qp->delta / (2.0 * double(ctx.d)), *ctx.hessian_range, n);
    upsilon = upsilon_quadratic(view.eta_eff, ctx.stats, bound, shrunk);
  }
}

}  // namespace

RunResult run_training(const TrainConfig& config, BatchSource& source, const Dataset* test_set) {
  if (config.epochs.has_value() == config.max_iterations.has_value())
    throw ConfigError("run_training: exactly one of epochs / max_iterations must be set");
  if (config.epochs && *config.epochs < 1)
    throw ConfigError("run_training: epochs must be >= 1");
  if (config.max_iterations && *config.max_iterations < 1)
    throw ConfigError("run_training: max_iterations must be >= 1");
  if (config.initial_n < 1) throw ConfigError("run_training: initial_n must be >= 1");
  if (policy_needs_variance(config.policy) && config.initial_n < 2)
    throw ConfigError("run_training: the chosen policy estimates gradient variance and needs "
                      "initial_n >= 2");

  const std::optional<long> N = source.dataset_size();
  if (config.epochs && !N)
    throw ConfigError("run_training: epoch-based termination requires a finite dataset");
  long n_max = 0;
  if (config.n_max)
    n_max = *config.n_max;
  else if (N)
    n_max = *N;
  else
    throw ConfigError("run_training: n_max must be set for stream sources");
  if (n_max < 1) throw ConfigError("run_training: n_max must be >= 1");
  const long n_min = config.n_min;
  if (n_min < 1 || n_min > n_max)
    throw ConfigError("run_training: need 1 <= n_min <= n_max, got [" + std::to_string(n_min) +
                      ", " + std::to_string(n_max) + "]");

  auto model = make_model(config.model);
  if (model->input_dim() != source.feature_dim())
    throw ConfigError("run_training: model input dimension " +
                      std::to_string(model->input_dim()) + " does not match data dimension " +
                      std::to_string(source.feature_dim()));
  const long d = model->param_count();
  const bool need_hessian = policy_needs_hessian(config.policy);

  std::mt19937_64 rng(config.seed);
  RunResult result;
  result.theta.assign(std::size_t(d), 0.0);
  model->init_params(result.theta, rng);

  StepRule rule = StepRule::from_spec(config.step_rule);
  RangeTracker tracker =
      config.range_override ? RangeTracker(*config.range_override) : RangeTracker();
  Vec hess_range_run(need_hessian ? std::size_t(d) : 0, 0.0);

  long eval_every = config.eval_every;
  if (eval_every <= 0)
    eval_every = (test_set && test_set->num_rows <= 500) ? 1 : 10;
  double last_metric = kNaN;

  long n = std::min(config.initial_n, n_max);
  long samples_seen = 0;
  Vec bx, by;
  Vec gbuf(std::size_t(d), 0.0);
  Vec hbuf(std::size_t(d), 0.0);

  for (long t = 1;; ++t) {
    source.start_iteration(t);
    source.next_batch(n, bx, by);
    const long p = source.feature_dim();

    GradientAccumulator gacc{std::size_t(d)};
    std::optional<HessianDiagAccumulator> hacc;
    if (need_hessian) hacc.emplace(std::size_t(d));
    double loss_sum = 0.0;
    for (long i = 0; i < n; ++i) {
      Example ex{std::span<const double>(bx).subspan(std::size_t(i) * std::size_t(p),
                                                     std::size_t(p)),
                 by[std::size_t(i)]};
      loss_sum += model->loss_and_gradient(result.theta, ex, gbuf);
      tracker.observe(l2_norm(gbuf));
      gacc.add(gbuf);
      if (hacc) {
        model->hessian_diag(result.theta, ex, hbuf);
        hacc->add(hbuf);
      }
    }
    BatchGradientStats raw = gacc.finalize();

    // step scale from this batch's mean gradient; the rule's state advances
    // exactly once per iteration, after the statistics are frozen
    StepScale scale = rule.step_scale(raw.mean);
    if (scale.is_global()) {
      double eta = scale.global_eta();
      for (long j = 0; j < d; ++j) result.theta[std::size_t(j)] -= eta * raw.mean[std::size_t(j)];
    } else {
      auto eta = scale.entries();
      for (long j = 0; j < d; ++j)
        result.theta[std::size_t(j)] -= eta[std::size_t(j)] * raw.mean[std::size_t(j)];
    }

    std::optional<BatchHessianDiagStats> hess;
    std::optional<Vec> hess_range;
    if (hacc) {
      for (long j = 0; j < d; ++j)
        hess_range_run[std::size_t(j)] =
            std::max(hess_range_run[std::size_t(j)], hacc->max_abs()[std::size_t(j)]);
      hess = hacc->finalize();
      hess_range = hess_range_run;
    }
    SizerView view = make_sizer_view(raw, scale, tracker.effective(), std::move(hess),
                                     std::move(hess_range), n_min, n_max, d);

    IterationRecord rec;
    rec.iteration = t;
    rec.samples_seen_total = samples_seen + n;
    rec.epoch = N ? rec.samples_seen_total / *N : 0;
    rec.batch_size = n;
    rec.loss = loss_sum / double(n);
    rec.grad_norm = raw.norm;
    rec.var_l1 = raw.has_variance() ? raw.variance_l1() : kNaN;
    rec.noise_to_signal =
        (raw.has_variance() && raw.norm > kDegenerateGradTol) ? noise_to_signal(raw) : kNaN;
    record_upsilon_bound(config.policy, view, n, rec.upsilon, rec.bound);

    long next_n = next_batch_size(config.policy, view.ctx);

    samples_seen = rec.samples_seen_total;
    bool will_stop = config.epochs ? (samples_seen >= *config.epochs * *N)
                                   : (t >= *config.max_iterations);
    if (test_set && (t == 1 || t % eval_every == 0 || will_stop))
      last_metric = evaluate(*model, result.theta, *test_set, model->task());
    rec.eval_metric = last_metric;
    result.records.push_back(rec);

    if (will_stop) break;
    n = next_n;
  }
  return result;
}

std::vector<IterationRecord> run(const TrainConfig& config, const Dataset& train) {
  SequentialDatasetSource source(train);
  return run_training(config, source, nullptr).records;
}

double evaluate(const Model& model, std::span<const double> theta, const Dataset& test_set,
                TaskKind task) {
  if (test_set.num_rows == 0) throw std::invalid_argument("evaluate: empty test set");
  if (task == TaskKind::Classification) {
    long correct = 0;
    for (long i = 0; i < test_set.num_rows; ++i) {
      double pred = model.predict(theta, test_set.row(i));
      if (long(pred) == long(test_set.targets[std::size_t(i)])) ++correct;
    }
    return double(correct) / double(test_set.num_rows);
  }
  double mean = 0.0;
  for (double y : test_set.targets) mean += y;
  mean /= double(test_set.num_rows);
  double ss_tot = 0.0, ss_res = 0.0;
  for (long i = 0; i < test_set.num_rows; ++i) {
    double y = test_set.targets[std::size_t(i)];
    double pred = model.predict(theta, test_set.row(i));
    ss_tot += (y - mean) * (y - mean);
    ss_res += (y - pred) * (y - pred);
  }
  if (ss_tot == 0.0)
    throw std::domain_error("evaluate: targets have zero variance, R2 is undefined");
  return 1.0 - ss_res / ss_tot;
}

void write_metrics_csv(const std::string& path, const std::vector<IterationRecord>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("write_metrics_csv: cannot open " + path + " for writing");
  out << "iteration,epoch,samples_seen_total,batch_size,loss,eval_metric,grad_norm,var_l1,"
         "noise_to_signal,upsilon,bound\n";
  char buf[256];
  for (const IterationRecord& r : records) {
    std::snprintf(buf, sizeof buf,
                  "%ld,%ld,%ld,%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.iteration,
                  r.epoch, r.samples_seen_total, r.batch_size, r.loss, r.eval_metric, r.grad_norm,
                  r.var_l1, r.noise_to_signal, r.upsilon, r.bound);
    out << buf;
  }
  if (!out) throw DataError("write_metrics_csv: write failed for " + path);
}

}  // namespace pastsgd
