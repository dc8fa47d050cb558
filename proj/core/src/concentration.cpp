#include "pastsgd/concentration.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pastsgd {

const char* to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::Hoeffding: return "hoeffding";
    case BoundKind::Chebyshev: return "chebyshev";
    case BoundKind::Bernstein: return "bernstein";
  }
  return "unknown";
}

std::optional<BoundKind> bound_kind_from_string(std::string_view name) {
  if (name == "hoeffding") return BoundKind::Hoeffding;
  if (name == "chebyshev") return BoundKind::Chebyshev;
  if (name == "bernstein") return BoundKind::Bernstein;
  return std::nullopt;
}

DistributionInfo::DistributionInfo(std::optional<double> range_bound,
                                   std::optional<Vec> variance_vec, long dim)
    : range_bound_(range_bound), variance_vec_(std::move(variance_vec)), dim_(dim) {
  if (dim_ <= 0)
    throw std::invalid_argument("DistributionInfo: dimension must be positive, got " +
                                std::to_string(dim_));
  if (range_bound_ && !(*range_bound_ >= 0.0))
    throw std::invalid_argument("DistributionInfo: range bound must be non-negative, got " +
                                std::to_string(*range_bound_));
  if (variance_vec_) {
    if (long(variance_vec_->size()) != dim_)
      throw std::invalid_argument("DistributionInfo: variance vector size " +
                                  std::to_string(variance_vec_->size()) +
                                  " does not match dimension " + std::to_string(dim_));
    double l1 = 0.0, sq = 0.0;
    for (double v : *variance_vec_) {
      if (v < 0.0)
        throw std::invalid_argument("DistributionInfo: negative variance entry " +
                                    std::to_string(v));
      l1 += v;
      sq += v * v;
    }
    var_l1_ = l1;
    var_l2_ = std::sqrt(sq);
  }
}

DistributionInfo DistributionInfo::for_hoeffding(double range_bound, long dim) {
  return DistributionInfo(range_bound, std::nullopt, dim);
}

DistributionInfo DistributionInfo::for_chebyshev(Vec variance_vec) {
  long d = long(variance_vec.size());
  return DistributionInfo(std::nullopt, std::move(variance_vec), d);
}

DistributionInfo DistributionInfo::for_bernstein(double range_bound, Vec variance_vec) {
  long d = long(variance_vec.size());
  return DistributionInfo(range_bound, std::move(variance_vec), d);
}

double DistributionInfo::range() const {
  if (!range_bound_) throw std::invalid_argument("DistributionInfo: range bound not set");
  return *range_bound_;
}

const Vec& DistributionInfo::variance() const {
  if (!variance_vec_) throw std::invalid_argument("DistributionInfo: variance vector not set");
  return *variance_vec_;
}

double DistributionInfo::variance_l1() const {
  if (!variance_vec_) throw std::invalid_argument("DistributionInfo: variance vector not set");
  return var_l1_;
}

double DistributionInfo::variance_l2() const {
  if (!variance_vec_) throw std::invalid_argument("DistributionInfo: variance vector not set");
  return var_l2_;
}

namespace {

void check_n_delta(const char* who, long n, double delta) {
  if (n < 1)
    throw std::invalid_argument(std::string(who) + ": batch size must be >= 1, got " +
                                std::to_string(n));
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument(std::string(who) + ": confidence delta must lie in (0,1), got " +
                                std::to_string(delta));
}

}  // namespace

double vector_bound(BoundKind kind, long n, double delta, const DistributionInfo& info) {
  check_n_delta("vector_bound", n, delta);
  const double nn = double(n);
  switch (kind) {
    case BoundKind::Hoeffding: {
      if (!info.has_range())
        throw std::invalid_argument("vector_bound: hoeffding requires the range bound L");
      double lg = std::log(double(info.dim() + 1) / delta);
      if (!(lg > 0.0)) throw std::invalid_argument("vector_bound: non-positive log term");
      return info.range() * std::sqrt(8.0 * lg / nn);
    }
    case BoundKind::Chebyshev: {
      if (!info.has_variance())
        throw std::invalid_argument("vector_bound: chebyshev requires the variance vector");
      return std::sqrt(info.variance_l1() / (nn * delta));
    }
    case BoundKind::Bernstein: {
      if (!info.has_range())
        throw std::invalid_argument("vector_bound: bernstein requires the range bound L");
      if (!info.has_variance())
        throw std::invalid_argument("vector_bound: bernstein requires the variance vector");
      double lg = std::log(double(info.dim() + 1) / delta);
      if (!(lg > 0.0)) throw std::invalid_argument("vector_bound: non-positive log term");
      return std::sqrt(2.0 * info.variance_l2() * lg / nn) + 2.0 * info.range() * lg / (3.0 * nn);
    }
  }
  throw std::invalid_argument("vector_bound: unknown bound kind");
}

double scalar_bound(BoundKind kind, long n, double delta, double range_width, double variance) {
  check_n_delta("scalar_bound", n, delta);
  const double nn = double(n);
  switch (kind) {
    case BoundKind::Hoeffding: {
      if (!(range_width >= 0.0))
        throw std::invalid_argument("scalar_bound: hoeffding requires a non-negative range width");
      double lg = std::log(2.0 / delta);
      return range_width * std::sqrt(lg / (2.0 * nn));
    }
    case BoundKind::Chebyshev: {
      if (!(variance >= 0.0))
        throw std::invalid_argument("scalar_bound: chebyshev requires a non-negative variance");
      return std::sqrt(variance / (nn * delta));
    }
    case BoundKind::Bernstein: {
      if (!(range_width >= 0.0))
        throw std::invalid_argument("scalar_bound: bernstein requires a non-negative range width");
      if (!(variance >= 0.0))
        throw std::invalid_argument("scalar_bound: bernstein requires a non-negative variance");
      double lg = std::log(2.0 / delta);
      return std::sqrt(2.0 * variance * lg / nn) + range_width * lg / (3.0 * nn);
    }
  }
  throw std::invalid_argument("scalar_bound: unknown bound kind");
}

}  // namespace pastsgd
