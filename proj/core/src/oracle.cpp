#include "pastsgd/oracle.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace pastsgd {

ScanResult brute_force_argmax(const std::function<double(long)>& objective, long n_max) {
  if (n_max < 1)
    throw std::invalid_argument("brute_force_argmax: n_max must be >= 1, got " +
                                std::to_string(n_max));
  ScanResult out;
  out.best_n = 1;
  out.best_value = 0.0;
  const long stride = std::max<long>(1, n_max / 50);
  bool first = true;
  for (long n = 1; n <= n_max; ++n) {
    double v = objective(n);
    if (!std::isfinite(v))
      throw std::runtime_error("brute_force_argmax: non-finite objective at n=" +
                               std::to_string(n));
    if (first || v > out.best_value) {
      out.best_n = n;
      out.best_value = v;
      first = false;
    }
    if (n == 1 || n == n_max || n % stride == 0) out.values.emplace_back(n, v);
  }
  return out;
}

Vec fd_gradient(const std::function<double(std::span<const double>)>& f, Vec theta, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("fd_gradient: step must be positive");
  Vec g(theta.size());
  for (std::size_t j = 0; j < theta.size(); ++j) {
    double orig = theta[j];
    theta[j] = orig + h;
    double up = f(theta);
    theta[j] = orig - h;
    double down = f(theta);
    theta[j] = orig;
    g[j] = (up - down) / (2.0 * h);
  }
  return g;
}

Vec fd_second_diag(const std::function<double(std::span<const double>)>& f, Vec theta, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("fd_second_diag: step must be positive");
  Vec d(theta.size());
  const double centre = f(theta);
  for (std::size_t j = 0; j < theta.size(); ++j) {
    double orig = theta[j];
    theta[j] = orig + h;
    double up = f(theta);
    theta[j] = orig - h;
    double down = f(theta);
    theta[j] = orig;
    d[j] = (up - 2.0 * centre + down) / (h * h);
  }
  return d;
}

namespace {

// maps the double bit pattern onto a monotone integer line
std::int64_t ordered_bits(double x) {
  auto i = std::bit_cast<std::int64_t>(x);
  return i < 0 ? std::int64_t(0x8000000000000000ull) - i : i;
}

}  // namespace

long ulp_distance(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) throw std::invalid_argument("ulp_distance: NaN input");
  std::int64_t ia = ordered_bits(a), ib = ordered_bits(b);
  std::int64_t diff = ia > ib ? ia - ib : ib - ia;
  return long(diff);
}

UniformBoxSampler::UniformBoxSampler(Vec lo, Vec hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.empty() || lo_.size() != hi_.size())
    throw std::invalid_argument("UniformBoxSampler: bound vectors empty or mismatched");
  mean_.resize(lo_.size());
  for (std::size_t i = 0; i < lo_.size(); ++i) {
    if (hi_[i] < lo_[i])
      throw std::invalid_argument("UniformBoxSampler: hi < lo at component " + std::to_string(i));
    mean_[i] = 0.5 * (lo_[i] + hi_[i]);
  }
}

Vec UniformBoxSampler::true_variance() const {
  Vec v(lo_.size());
  for (std::size_t i = 0; i < lo_.size(); ++i) {
    double w = hi_[i] - lo_[i];
    v[i] = w * w / 12.0;
  }
  return v;
}

double UniformBoxSampler::range_bound() const {
  // the norm is maximised at a box corner: per component the larger of |lo|, |hi|
  double s = 0.0;
  for (std::size_t i = 0; i < lo_.size(); ++i) {
    double m = std::max(std::abs(lo_[i]), std::abs(hi_[i]));
    s += m * m;
  }
  return std::sqrt(s);
}

void UniformBoxSampler::draw(std::mt19937_64& rng, Vec& out) const {
  out.resize(lo_.size());
  for (std::size_t i = 0; i < lo_.size(); ++i) {
    if (hi_[i] == lo_[i]) {
      out[i] = lo_[i];
    } else {
      std::uniform_real_distribution<double> dist(lo_[i], hi_[i]);
      out[i] = dist(rng);
    }
  }
}

double monte_carlo_coverage(BoundKind kind, const VectorSampler& sampler, long n, double delta,
                            long trials, std::uint64_t seed) {
  if (trials < 100)
    throw std::invalid_argument("monte_carlo_coverage: need at least 100 trials, got " +
                                std::to_string(trials));
  const long d = sampler.dim();
  DistributionInfo info(sampler.range_bound(), sampler.true_variance(), d);
  const double bound = vector_bound(kind, n, delta, info);
  const Vec& mu = sampler.true_mean();

  std::mt19937_64 rng(seed);
  Vec sample;
  Vec mean_acc(std::size_t(d), 0.0);
  long violations = 0;
  for (long t = 0; t < trials; ++t) {
    std::fill(mean_acc.begin(), mean_acc.end(), 0.0);
    for (long i = 0; i < n; ++i) {
      sampler.draw(rng, sample);
      for (long j = 0; j < d; ++j) mean_acc[std::size_t(j)] += sample[std::size_t(j)];
    }
    double dist_sq = 0.0;
    for (long j = 0; j < d; ++j) {
      double dev = mean_acc[std::size_t(j)] / double(n) - mu[std::size_t(j)];
      dist_sq += dev * dev;
    }
    double dist = std::sqrt(dist_sq);
    bool breach = bound > 0.0 ? (dist > bound) : (dist > 0.0);
    if (breach) ++violations;
  }
  return double(violations) / double(trials);
}

}  // namespace pastsgd
