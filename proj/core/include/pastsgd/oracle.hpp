#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "pastsgd/concentration.hpp"
#include "pastsgd/vec_stats.hpp"

namespace pastsgd {

// Brute-force references used by tests and the verify command. Deliberately
// independent of the production sizers so a shared bug cannot hide here.

struct ScanResult {
  long best_n = 1;
  double best_value = 0.0;
  std::vector<std::pair<long, double>> values;  // thinned (n, objective) samples
};

// Exhaustive integer argmax of the objective over n in [1, n_max].
// Ties resolve to the smallest n. Throws on non-finite objective values,
// naming the offending n.
ScanResult brute_force_argmax(const std::function<double(long)>& objective, long n_max);

// A random vector source whose mean, per-component variance and norm bound
// are known analytically.
class VectorSampler {
 public:
  virtual ~VectorSampler() = default;
  virtual long dim() const = 0;
  virtual const Vec& true_mean() const = 0;
  virtual Vec true_variance() const = 0;
  virtual double range_bound() const = 0;  // sup of sample Euclidean norms
  virtual void draw(std::mt19937_64& rng, Vec& out) const = 0;
};

// Independent uniform draws from the box [lo_i, hi_i] per component.
class UniformBoxSampler : public VectorSampler {
 public:
  UniformBoxSampler(Vec lo, Vec hi);

  long dim() const override { return long(lo_.size()); }
  const Vec& true_mean() const override { return mean_; }
  Vec true_variance() const override;  // (hi-lo)^2 / 12
  double range_bound() const override;
  void draw(std::mt19937_64& rng, Vec& out) const override;

 private:
  Vec lo_, hi_, mean_;
};

// Central finite-difference approximations for checking analytic
// derivatives of a scalar function of the parameter vector.
Vec fd_gradient(const std::function<double(std::span<const double>)>& f, Vec theta, double h);
Vec fd_second_diag(const std::function<double(std::span<const double>)>& f, Vec theta, double h);

// Number of representable doubles strictly between a and b (0 when equal).
// Throws on NaN; infinities of the same sign compare equal.
long ulp_distance(double a, double b);

// Empirical violation rate of the deviation guarantee: fraction of trials
// where the distance between an n-sample mean and the true mean breaches
// vector_bound(kind, n, delta, info) with info taken from the sampler's
// analytic L and variance. A breach is strict (distance > bound) when the
// bound is positive; with a zero bound any positive distance counts.
// Requires trials >= 100.
double monte_carlo_coverage(BoundKind kind, const VectorSampler& sampler, long n, double delta,
                            long trials, std::uint64_t seed);

}  // namespace pastsgd
