#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "pastsgd/batch_size.hpp"
#include "pastsgd/dataset.hpp"
#include "pastsgd/models.hpp"
#include "pastsgd/step_size.hpp"

namespace pastsgd {

struct ChangeSchedule {
  long period = 35;  // optimizer iterations between target redraws
};

struct TrainConfig {
  BatchPolicy policy = FixedPolicy{32};
  StepRuleSpec step_rule = ConstantStepSpec{0.01};
  ModelSpec model = LinearRegressionSpec{1};
  long initial_n = 2;
  std::optional<long> epochs;          // exactly one of epochs /
  std::optional<long> max_iterations;  // max_iterations must be set
  std::uint64_t seed = 0;
  std::optional<ChangeSchedule> change_schedule;  // informational for stream runs
  long n_min = 2;
  std::optional<long> n_max;  // defaults to the dataset size
  long eval_every = 0;        // 0 = auto (1 for small test sets, else 10)
  std::optional<double> range_override;  // user-supplied bound on gradient norms
};

// One row of the training log. Quantities that are undefined for the active
// policy or batch (variance at n=1, improvement under fixed sizing) are NaN.
struct IterationRecord {
  long iteration = 0;  // 1-based
  long epoch = 0;      // completed passes; 0 for streams
  long samples_seen_total = 0;
  long batch_size = 0;
  double loss = 0.0;  // mean per-sample loss over the batch
  double eval_metric = 0.0;
  double grad_norm = 0.0;
  double var_l1 = 0.0;
  double noise_to_signal = 0.0;
  double upsilon = 0.0;
  double bound = 0.0;
};

// Where batches come from: a finite dataset visited sequentially with
// wrap-around, or an endless synthetic stream.
class BatchSource {
 public:
  virtual ~BatchSource() = default;
  virtual std::optional<long> dataset_size() const = 0;
  virtual long feature_dim() const = 0;
  virtual void start_iteration(long /*iteration*/) {}
  virtual void next_batch(long n, Vec& features, Vec& targets) = 0;
};

// Sequential pass over a dataset; the cursor wraps around without
// reshuffling, so every index is visited exactly once per N samples.
class SequentialDatasetSource final : public BatchSource {
 public:
  explicit SequentialDatasetSource(const Dataset& ds);

  std::optional<long> dataset_size() const override { return ds_->num_rows; }
  long feature_dim() const override { return ds_->num_cols; }
  void next_batch(long n, Vec& features, Vec& targets) override;
  long cursor() const { return cursor_; }

 private:
  const Dataset* ds_;
  long cursor_ = 0;
};

// Wraps a polynomial stream; forwards the iteration index so the stream can
// redraw its coefficients on schedule.
class PolynomialStreamSource final : public BatchSource {
 public:
  explicit PolynomialStreamSource(PolynomialStream stream);

  std::optional<long> dataset_size() const override { return std::nullopt; }
  long feature_dim() const override { return stream_.feature_dim(); }
  void start_iteration(long iteration) override { stream_.apply_change_point(iteration); }
  void next_batch(long n, Vec& features, Vec& targets) override;
  const PolynomialStream& stream() const { return stream_; }

 private:
  PolynomialStream stream_;
};

struct RunResult {
  std::vector<IterationRecord> records;
  Vec theta;  // final parameters
};

// The optimization loop: draw a batch, accumulate per-sample gradient (and
// curvature) statistics, take a descent step with the current batch size,
// then ask the policy for the next one. test_set may be null (metric NaN).
RunResult run_training(const TrainConfig& config, BatchSource& source, const Dataset* test_set);

// Convenience for finite datasets without evaluation.
std::vector<IterationRecord> run(const TrainConfig& config, const Dataset& train);

// Classification: fraction of argmax-correct predictions. Regression:
// coefficient of determination 1 - SS_res/SS_tot (errors on zero-variance
// targets).
double evaluate(const Model& model, std::span<const double> theta, const Dataset& test_set,
                TaskKind task);

// Writes the exact column set of IterationRecord, one row per record, with
// 17 significant digits so equal runs produce byte-identical files.
void write_metrics_csv(const std::string& path, const std::vector<IterationRecord>& records);

}  // namespace pastsgd
