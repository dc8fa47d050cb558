#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace pastsgd {

using Vec = std::vector<double>;

// Reductions use a fixed left-to-right order so results are reproducible
// bit for bit across runs with the same inputs.
double l1_norm(std::span<const double> v);
double l2_norm(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);

// Summary of one mini-batch of per-sample gradient vectors.
struct BatchGradientStats {
  Vec mean;
  std::optional<Vec> variance;  // per-component, n-1 denominator; absent when n == 1
  long n = 0;
  double norm = 0.0;  // Euclidean norm of mean

  bool has_variance() const { return variance.has_value(); }
  double variance_l1() const;  // sum of per-component variances
  double variance_l2() const;  // Euclidean norm of the variance vector
};

// Summary of one mini-batch of per-sample loss-Hessian diagonals.
struct BatchHessianDiagStats {
  Vec mean_diag;
  std::optional<Vec> var_diag;  // n-1 denominator; absent when n == 1
  long n = 0;
};

// Running upper bound on per-sample gradient norms. A user-supplied override
// wins over the observed maximum when present.
class RangeTracker {
 public:
  RangeTracker() = default;
  explicit RangeTracker(double user_override);

  void observe(double sample_norm);
  double effective() const;  // override if set, else observed max
  double observed_max() const { return observed_max_; }
  bool has_override() const { return override_.has_value(); }

 private:
  double observed_max_ = 0.0;
  std::optional<double> override_;
};

// Streaming mean/variance accumulator over sample vectors of fixed dimension.
// Keeps running sum and sum of squares per component; never materialises the
// sample list, so memory is O(d) regardless of batch size.
class GradientAccumulator {
 public:
  explicit GradientAccumulator(std::size_t dim);

  void add(std::span<const double> sample);
  long count() const { return n_; }
  std::size_t dim() const { return sum_.size(); }
  BatchGradientStats finalize() const;

 private:
  Vec sum_;
  Vec sum_sq_;
  long n_ = 0;
};

// Same shape of accumulator for Hessian diagonals; additionally tracks the
// running max absolute value per entry (the per-entry sample range).
class HessianDiagAccumulator {
 public:
  explicit HessianDiagAccumulator(std::size_t dim);

  void add(std::span<const double> sample);
  long count() const { return n_; }
  BatchHessianDiagStats finalize() const;
  const Vec& max_abs() const { return max_abs_; }

 private:
  Vec sum_;
  Vec sum_sq_;
  Vec max_abs_;
  long n_ = 0;
};

// Batch-at-once variants built on the accumulators above.
BatchGradientStats accumulate_gradient_stats(std::span<const Vec> per_sample_gradients);
BatchHessianDiagStats accumulate_hessian_diag_stats(std::span<const Vec> per_sample_diags);

// ||variance||_1 / ||mean||_2^2. Throws std::domain_error on zero mean norm,
// std::invalid_argument when the variance is unavailable.
double noise_to_signal(const BatchGradientStats& stats);

// Feed the Euclidean norm of every sample into the tracker.
RangeTracker& track_range(RangeTracker& tracker, std::span<const Vec> per_sample_gradients);

}  // namespace pastsgd
