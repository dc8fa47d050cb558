#pragma once

#include <optional>
#include <string_view>

#include "pastsgd/vec_stats.hpp"

namespace pastsgd {

// Which concentration inequality backs the deviation bound.
enum class BoundKind { Hoeffding, Chebyshev, Bernstein };

const char* to_string(BoundKind kind);
std::optional<BoundKind> bound_kind_from_string(std::string_view name);

// What is known about the sampled vector distribution. Hoeffding needs a
// norm bound L on individual samples, Chebyshev a per-component variance
// vector, Bernstein both. Variance norms are cached at construction so bound
// evaluation is O(1) no matter the dimension.
class DistributionInfo {
 public:
  DistributionInfo(std::optional<double> range_bound, std::optional<Vec> variance_vec, long dim);

  static DistributionInfo for_hoeffding(double range_bound, long dim);
  static DistributionInfo for_chebyshev(Vec variance_vec);
  static DistributionInfo for_bernstein(double range_bound, Vec variance_vec);

  bool has_range() const { return range_bound_.has_value(); }
  double range() const;
  bool has_variance() const { return variance_vec_.has_value(); }
  const Vec& variance() const;
  double variance_l1() const;
  double variance_l2() const;  // sqrt of sum of squared per-component variances
  long dim() const { return dim_; }

 private:
  std::optional<double> range_bound_;
  std::optional<Vec> variance_vec_;
  long dim_ = 0;
  double var_l1_ = 0.0;
  double var_l2_ = 0.0;
};

// High-probability deviation radius for the Euclidean distance between the
// mean of n i.i.d. sample vectors and the true expectation: with probability
// at least 1-delta the distance stays below the returned value.
double vector_bound(BoundKind kind, long n, double delta, const DistributionInfo& info);

// Two-sided scalar analogue for a single mean estimate. range_width is the
// width of the support interval; variance is the per-sample variance.
double scalar_bound(BoundKind kind, long n, double delta, double range_width, double variance);

}  // namespace pastsgd
