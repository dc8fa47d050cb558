#include "pastsgd/batch_size.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <string>
#include <vector>

namespace pastsgd {

bool policy_needs_variance(const BatchPolicy& policy) {
  return std::visit(
      [](const auto& p) -> bool {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, FixedPolicy>) return false;
        if constexpr (std::is_same_v<T, DsgPolicy>) return true;
        if constexpr (std::is_same_v<T, LpastPolicy> || std::is_same_v<T, QpastPolicy>)
          return p.kind != BoundKind::Hoeffding;
      },
      policy);
}

bool policy_needs_hessian(const BatchPolicy& policy) {
  return std::holds_alternative<QpastPolicy>(policy);
}

std::string policy_name(const BatchPolicy& policy) {
  return std::visit(
      [](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, FixedPolicy>) return "fixed";
        if constexpr (std::is_same_v<T, DsgPolicy>) return "dsg";
        if constexpr (std::is_same_v<T, LpastPolicy>)
          return std::string("lpast-") + to_string(p.kind);
        if constexpr (std::is_same_v<T, QpastPolicy>)
          return std::string("qpast-") + to_string(p.kind);
      },
      policy);
}

namespace {

void check_sizer_inputs(const char* who, double grad_norm, double delta) {
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument(std::string(who) + ": confidence delta must lie in (0,1), got " +
                                std::to_string(delta));
  if (!(grad_norm > kDegenerateGradTol))
    throw DegenerateGradient(std::string(who) + ": gradient norm " + std::to_string(grad_norm) +
                             " is degenerate");
}

DistributionInfo grad_info_for(BoundKind kind, double L, std::span<const double> var_vec, long d) {
  switch (kind) {
    case BoundKind::Hoeffding:
      return DistributionInfo::for_hoeffding(L, d);
    case BoundKind::Chebyshev:
      return DistributionInfo(std::nullopt, Vec(var_vec.begin(), var_vec.end()), d);
    case BoundKind::Bernstein:
      return DistributionInfo(L, Vec(var_vec.begin(), var_vec.end()), d);
  }
  throw std::invalid_argument("grad_info_for: unknown bound kind");
}

}  // namespace

DistributionInfo sizer_grad_info(BoundKind kind, const SizerContext& ctx) {
  const long d = ctx.d > 0 ? ctx.d : long(ctx.stats.mean.size());
  if (kind != BoundKind::Hoeffding && !ctx.stats.has_variance())
    throw std::invalid_argument("sizer_grad_info: gradient variance unavailable for " +
                                std::string(to_string(kind)));
  std::span<const double> var_span;
  if (kind != BoundKind::Hoeffding) var_span = *ctx.stats.variance;
  return grad_info_for(kind, ctx.L, var_span, d);
}

double lpast_stationary_point(BoundKind kind, double grad_norm, double L,
                              std::span<const double> var_vec, double delta, long d) {
  check_sizer_inputs("lpast_stationary_point", grad_norm, delta);
  const double g2 = grad_norm * grad_norm;
  switch (kind) {
    case BoundKind::Hoeffding: {
      if (!(L > 0.0))
        throw std::invalid_argument("lpast_stationary_point: hoeffding requires L > 0");
      double lg = std::log(double(d + 1) / delta);
      return 18.0 * L * L * lg / g2;
    }
    case BoundKind::Chebyshev: {
      double var_l1 = l1_norm(var_vec);
      // written on gamma^2 = 4*delta/9 so the noise-to-signal rule with that
      // gamma reproduces this value bit for bit
      return var_l1 / ((4.0 * delta / 9.0) * g2);
    }
    case BoundKind::Bernstein: {
      if (!(L > 0.0))
        throw std::invalid_argument("lpast_stationary_point: bernstein requires L > 0");
      double lg = std::log(double(d + 1) / delta);
      double a = (2.0 / 3.0) * L * lg;
      double b = 2.0 * l2_norm(var_vec) * lg;
      double disc = std::sqrt(9.0 * b * b + 32.0 * a * b * grad_norm);
      return (9.0 * b + 16.0 * a * grad_norm + 3.0 * disc) / (8.0 * g2);
    }
  }
  throw std::invalid_argument("lpast_stationary_point: unknown bound kind");
}

long lpast_closed_form(BoundKind kind, double grad_norm, double L, std::span<const double> var_vec,
                       double delta, long d) {
  double n_star = lpast_stationary_point(kind, grad_norm, L, var_vec, delta, d);
  if (!std::isfinite(n_star))
    throw std::domain_error("lpast_closed_form: non-finite stationary point");
  long lo = std::max<long>(1, long(std::floor(n_star)));
  long hi = std::max<long>(1, long(std::ceil(n_star)));
  if (lo == hi) return lo;

  DistributionInfo info = grad_info_for(kind, L, var_vec, d);
  auto score = [&](long n) {
    return (grad_norm - vector_bound(kind, n, delta, info)) / double(n);
  };
  return score(lo) >= score(hi) ? lo : hi;
}

double dsg_ratio(double var_l1, double grad_norm, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("dsg_ratio: gamma must lie in (0,1), got " + std::to_string(gamma));
  if (var_l1 < 0.0) throw std::invalid_argument("dsg_ratio: negative variance sum");
  if (!(grad_norm > kDegenerateGradTol))
    throw DegenerateGradient("dsg_ratio: gradient norm " + std::to_string(grad_norm) +
                             " is degenerate");
  return var_l1 / ((gamma * gamma) * (grad_norm * grad_norm));
}

long dsg_size(double var_l1, double grad_norm, double gamma) {
  double ratio = dsg_ratio(var_l1, grad_norm, gamma);
  double guarded = ratio - 8.0 * DBL_EPSILON * std::max(1.0, ratio);
  long n = long(std::ceil(guarded));
  return std::max<long>(1, n);
}

long qpast_numeric(const SizerContext& ctx, BoundKind kind, double delta) {
  check_sizer_inputs("qpast_numeric", ctx.stats.norm, delta);
  if (!ctx.hess)
    throw std::invalid_argument("qpast_numeric: Hessian diagonal statistics are required");
  if (ctx.n_min < 1 || ctx.n_max < ctx.n_min)
    throw std::invalid_argument("qpast_numeric: invalid batch bounds [" +
                                std::to_string(ctx.n_min) + ", " + std::to_string(ctx.n_max) + "]");
  const long d = ctx.d > 0 ? ctx.d : long(ctx.stats.mean.size());
  if (long(ctx.hess->mean_diag.size()) != d)
    throw std::invalid_argument("qpast_numeric: Hessian diagonal size " +
                                std::to_string(ctx.hess->mean_diag.size()) +
                                " does not match dimension " + std::to_string(d));

  DistributionInfo grad_info = sizer_grad_info(kind, ctx);

  const bool hess_needs_range = (kind != BoundKind::Chebyshev);
  Vec zero_range;
  std::span<const double> range_span;
  if (ctx.hessian_range) {
    range_span = *ctx.hessian_range;
  } else if (hess_needs_range) {
    throw std::invalid_argument("qpast_numeric: hessian_range required for " +
                                std::string(to_string(kind)));
  } else {
    zero_range.assign(std::size_t(d), 0.0);
    range_span = zero_range;
  }

  const double eta_eff = ctx.eta.max_entry();
  const double delta_grad = delta / 2.0;
  const double delta_entry = delta / (2.0 * double(d));
  auto score = [&](long n) {
    double b_grad = vector_bound(kind, n, delta_grad, grad_info);
    ShrunkHessianDiag shrunk = shrink_hessian_diag(*ctx.hess, kind, delta_entry, range_span, n);
    return upsilon_quadratic(eta_eff, ctx.stats, b_grad, shrunk) / double(n);
  };

  // coarse geometric grid over [n_min, n_max]
  std::vector<long> grid;
  for (long n = ctx.n_min; n < ctx.n_max;) {
    grid.push_back(n);
    n = std::max(n + 1, long(std::ceil(double(n) * 1.1)));
  }
  grid.push_back(ctx.n_max);

  std::size_t best_idx = 0;
  double best_val = score(grid[0]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    double v = score(grid[i]);
    if (v > best_val) {
      best_val = v;
      best_idx = i;
    }
  }

  // exhaustive pass over the bracketing interval around the best grid point
  long lo = best_idx > 0 ? grid[best_idx - 1] : grid.front();
  long hi = best_idx + 1 < grid.size() ? grid[best_idx + 1] : grid.back();
  long best_n = lo;
  best_val = score(lo);
  for (long n = lo + 1; n <= hi; ++n) {
    double v = score(n);
    if (v > best_val) {
      best_val = v;
      best_n = n;
    }
  }

  if (!(best_val > 0.0)) return ctx.n_max;  // no candidate promises improvement
  return best_n;
}

long next_batch_size(const BatchPolicy& policy, const SizerContext& ctx) {
  if (ctx.n_min < 1 || ctx.n_max < ctx.n_min)
    throw std::invalid_argument("next_batch_size: invalid batch bounds [" +
                                std::to_string(ctx.n_min) + ", " + std::to_string(ctx.n_max) + "]");
  auto clamp = [&](long n) { return std::clamp(n, ctx.n_min, ctx.n_max); };

  if (const auto* fixed = std::get_if<FixedPolicy>(&policy)) {
    if (fixed->n < 1)
      throw std::invalid_argument("next_batch_size: fixed batch size must be >= 1, got " +
                                  std::to_string(fixed->n));
    return clamp(fixed->n);
  }

  if (!(ctx.stats.norm > kDegenerateGradTol)) return ctx.n_max;

  if (policy_needs_variance(policy) && !ctx.stats.has_variance())
    throw std::invalid_argument(
        "next_batch_size: gradient variance unavailable; use a larger warm-up batch (need at "
        "least 2 samples)");

  const long d = ctx.d > 0 ? ctx.d : long(ctx.stats.mean.size());
  if (const auto* dsg = std::get_if<DsgPolicy>(&policy))
    return clamp(dsg_size(ctx.stats.variance_l1(), ctx.stats.norm, dsg->gamma));
  if (const auto* lp = std::get_if<LpastPolicy>(&policy)) {
    std::span<const double> var_span;
    if (ctx.stats.has_variance()) var_span = *ctx.stats.variance;
    return clamp(lpast_closed_form(lp->kind, ctx.stats.norm, ctx.L, var_span, lp->delta, d));
  }
  const auto& qp = std::get<QpastPolicy>(policy);
  if (!ctx.hess)
    throw std::invalid_argument(
        "next_batch_size: Hessian diagonal statistics required for the quadratic sizer");
  return qpast_numeric(ctx, qp.kind, qp.delta);
}

}  // namespace pastsgd
