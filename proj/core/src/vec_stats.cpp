#include "pastsgd/vec_stats.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pastsgd {

double l1_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("dot: size mismatch " + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double BatchGradientStats::variance_l1() const {
  if (!variance)
    throw std::invalid_argument("variance_l1: variance unavailable (single-sample batch)");
  return l1_norm(*variance);
}

double BatchGradientStats::variance_l2() const {
  if (!variance)
    throw std::invalid_argument("variance_l2: variance unavailable (single-sample batch)");
  return l2_norm(*variance);
}

RangeTracker::RangeTracker(double user_override) : override_(user_override) {
  if (!(user_override > 0.0))
    throw std::invalid_argument("RangeTracker: override must be positive, got " +
                                std::to_string(user_override));
}

void RangeTracker::observe(double sample_norm) {
  if (sample_norm > observed_max_) observed_max_ = sample_norm;
}

double RangeTracker::effective() const {
  return override_ ? *override_ : observed_max_;
}

GradientAccumulator::GradientAccumulator(std::size_t dim) : sum_(dim, 0.0), sum_sq_(dim, 0.0) {
  if (dim == 0) throw std::invalid_argument("GradientAccumulator: dimension must be positive");
}

void GradientAccumulator::add(std::span<const double> sample) {
  if (sample.size() != sum_.size())
    throw std::invalid_argument("GradientAccumulator: sample dimension " +
                                std::to_string(sample.size()) + " does not match " +
                                std::to_string(sum_.size()));
  for (std::size_t i = 0; i < sample.size(); ++i) {
    sum_[i] += sample[i];
    sum_sq_[i] += sample[i] * sample[i];
  }
  ++n_;
}

BatchGradientStats GradientAccumulator::finalize() const {
  if (n_ == 0) throw std::invalid_argument("GradientAccumulator: empty batch");
  BatchGradientStats out;
  out.n = n_;
  out.mean.resize(sum_.size());
  for (std::size_t i = 0; i < sum_.size(); ++i) out.mean[i] = sum_[i] / double(n_);
  out.norm = l2_norm(out.mean);
  if (n_ >= 2) {
    Vec var(sum_.size());
    for (std::size_t i = 0; i < sum_.size(); ++i) {
      // unbiased: (sum_sq - n*mean^2) / (n-1), clamped against fp cancellation
      double v = (sum_sq_[i] - double(n_) * out.mean[i] * out.mean[i]) / double(n_ - 1);
      var[i] = v > 0.0 ? v : 0.0;
    }
    out.variance = std::move(var);
  }
  return out;
}

HessianDiagAccumulator::HessianDiagAccumulator(std::size_t dim)
    : sum_(dim, 0.0), sum_sq_(dim, 0.0), max_abs_(dim, 0.0) {
  if (dim == 0) throw std::invalid_argument("HessianDiagAccumulator: dimension must be positive");
}

void HessianDiagAccumulator::add(std::span<const double> sample) {
  if (sample.size() != sum_.size())
    throw std::invalid_argument("HessianDiagAccumulator: sample dimension " +
                                std::to_string(sample.size()) + " does not match " +
                                std::to_string(sum_.size()));
  for (std::size_t i = 0; i < sample.size(); ++i) {
    sum_[i] += sample[i];
    sum_sq_[i] += sample[i] * sample[i];
    double a = std::abs(sample[i]);
    if (a > max_abs_[i]) max_abs_[i] = a;
  }
  ++n_;
}

BatchHessianDiagStats HessianDiagAccumulator::finalize() const {
  if (n_ == 0) throw std::invalid_argument("HessianDiagAccumulator: empty batch");
  BatchHessianDiagStats out;
  out.n = n_;
  out.mean_diag.resize(sum_.size());
  for (std::size_t i = 0; i < sum_.size(); ++i) out.mean_diag[i] = sum_[i] / double(n_);
  if (n_ >= 2) {
    Vec var(sum_.size());
    for (std::size_t i = 0; i < sum_.size(); ++i) {
      double v = (sum_sq_[i] - double(n_) * out.mean_diag[i] * out.mean_diag[i]) / double(n_ - 1);
      var[i] = v > 0.0 ? v : 0.0;
    }
    out.var_diag = std::move(var);
  }
  return out;
}

BatchGradientStats accumulate_gradient_stats(std::span<const Vec> per_sample_gradients) {
  if (per_sample_gradients.empty())
    throw std::invalid_argument("accumulate_gradient_stats: empty batch");
  GradientAccumulator acc(per_sample_gradients.front().size());
  for (const Vec& g : per_sample_gradients) acc.add(g);
  return acc.finalize();
}

BatchHessianDiagStats accumulate_hessian_diag_stats(std::span<const Vec> per_sample_diags) {
  if (per_sample_diags.empty())
    throw std::invalid_argument("accumulate_hessian_diag_stats: empty batch");
  HessianDiagAccumulator acc(per_sample_diags.front().size());
  for (const Vec& h : per_sample_diags) acc.add(h);
  return acc.finalize();
}

double noise_to_signal(const BatchGradientStats& stats) {
  if (!stats.has_variance())
    throw std::invalid_argument("noise_to_signal: variance unavailable (single-sample batch)");
  if (stats.norm == 0.0) throw std::domain_error("noise_to_signal: zero gradient norm");
  return stats.variance_l1() / (stats.norm * stats.norm);
}

RangeTracker& track_range(RangeTracker& tracker, std::span<const Vec> per_sample_gradients) {
  for (const Vec& g : per_sample_gradients) tracker.observe(l2_norm(g));
  return tracker;
}

}  // namespace pastsgd
