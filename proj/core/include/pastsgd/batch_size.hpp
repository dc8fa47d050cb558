#pragma once

#include <optional>
#include <stdexcept>
#include <variant>

#include "pastsgd/concentration.hpp"
#include "pastsgd/improvement.hpp"
#include "pastsgd/vec_stats.hpp"

namespace pastsgd {

// Gradient norms below this are treated as a stationary point: adaptive
// sizers respond by requesting the maximum allowed batch.
inline constexpr double kDegenerateGradTol = 1e-12;

// Thrown by sizers called directly with a degenerate gradient;
// next_batch_size intercepts the condition and returns n_max instead.
class DegenerateGradient : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct FixedPolicy {
  long n = 1;
};
struct DsgPolicy {
  double gamma = 0.5;  // noise-to-signal ceiling, in (0,1)
};
struct LpastPolicy {
  BoundKind kind = BoundKind::Hoeffding;
  double delta = 0.1;
};
struct QpastPolicy {
  BoundKind kind = BoundKind::Hoeffding;
  double delta = 0.1;
};
using BatchPolicy = std::variant<FixedPolicy, DsgPolicy, LpastPolicy, QpastPolicy>;

bool policy_needs_variance(const BatchPolicy& policy);
bool policy_needs_hessian(const BatchPolicy& policy);
std::string policy_name(const BatchPolicy& policy);  // e.g. "lpast-bernstein"

// Everything a sizer may consult when proposing the next batch size.
struct SizerContext {
  BatchGradientStats stats;
  std::optional<BatchHessianDiagStats> hess;
  std::optional<Vec> hessian_range;  // per-entry support width of Hessian diag samples
  double L = 0.0;                    // bound on per-sample gradient norms
  StepScale eta;
  long n_min = 2;
  long n_max = 1;
  long d = 0;
};

// Distribution knowledge for the gradient mean as a sizer sees it: ctx.L
// for Hoeffding/Bernstein, the batch variance vector for Chebyshev and
// Bernstein. Throws when a required field is unavailable.
DistributionInfo sizer_grad_info(BoundKind kind, const SizerContext& ctx);

// Real-valued maximiser of (grad_norm - B(n))/n for the closed-form kinds.
double lpast_stationary_point(BoundKind kind, double grad_norm, double L,
                              std::span<const double> var_vec, double delta, long d);

// Closed-form linear sizer: stationary point integerised by comparing the
// objective at floor and ceil (ties resolve to the smaller n).
long lpast_closed_form(BoundKind kind, double grad_norm, double L, std::span<const double> var_vec,
                       double delta, long d);

// Noise-to-signal ratio var_l1 / (gamma^2 * grad_norm^2) before rounding.
double dsg_ratio(double var_l1, double grad_norm, double gamma);

// Ceil of dsg_ratio, at least 1. A tiny epsilon guard keeps fp round-off
// from pushing exact-integer ratios over the next integer.
long dsg_size(double var_l1, double grad_norm, double gamma);

// Numeric quadratic sizer: integer argmax over [n_min, n_max] of the
// second-order improvement rate, with the gradient bound taken at delta/2
// and each Hessian diagonal entry bound at delta/(2d). Scans a geometric
// grid (ratio <= 1.1), then refines exhaustively inside the bracketing
// interval. If every candidate value is <= 0, returns n_max.
long qpast_numeric(const SizerContext& ctx, BoundKind kind, double delta);

// Policy dispatch with clamping to [n_min, n_max]. Degenerate gradients
// yield n_max. Variance-requiring policies fail with instructions to use a
// larger warm-up batch when the variance is unavailable.
long next_batch_size(const BatchPolicy& policy, const SizerContext& ctx);

}  // namespace pastsgd
