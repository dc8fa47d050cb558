#pragma once

#include "pastsgd/concentration.hpp"
#include "pastsgd/vec_stats.hpp"

namespace pastsgd {

// A step size: either one global learning rate or a per-parameter vector
// (as produced by diagonal schemes such as RMSprop).
class StepScale {
 public:
  StepScale() : global_(1.0) {}

  static StepScale global(double eta);
  static StepScale per_param(Vec entries);

  bool is_global() const { return global_.has_value(); }
  double global_eta() const;                // throws when per-parameter
  std::span<const double> entries() const;  // throws when global
  double max_entry() const;                 // global eta, or max of the vector

 private:
  std::optional<double> global_;
  Vec entries_;
};

// Conservative per-entry estimate of the loss-Hessian diagonal: each batch
// mean is shrunk downward by a scalar deviation bound, so positive curvature
// is never overstated.
struct ShrunkHessianDiag {
  Vec values;
};

// First-order improvement guess for one step of size eta against a gradient
// estimate of the given norm, discounted by the deviation bound. May be
// negative when the bound dominates the signal.
double upsilon_linear(double eta, double grad_norm, double bound);

// Lower-confidence Hessian diagonal at batch size n: entry i is mean_diag[i]
// minus the scalar deviation bound at delta_per_entry built from that entry's
// support width range_per_entry[i] and sample variance. n may differ from
// hess.n when a sizer probes candidate batch sizes with statistics held
// fixed. Chebyshev ignores the ranges; Hoeffding ignores the variances.
ShrunkHessianDiag shrink_hessian_diag(const BatchHessianDiagStats& hess, BoundKind kind,
                                      double delta_per_entry,
                                      std::span<const double> range_per_entry, long n);

// Second-order improvement guess: the linear term plus the curvature
// correction 0.5 * eta^2 * sum_i shrunk_i * mean_i^2.
double upsilon_quadratic(double eta, const BatchGradientStats& stats, double grad_bound,
                         const ShrunkHessianDiag& shrunk);

// Per-parameter variant for a diagonal step scale: each coordinate carries
// its own step size and its own gradient deviation bound.
double upsilon_diag_precond(std::span<const double> eta, const BatchGradientStats& stats,
                            std::span<const double> grad_bound_per_entry,
                            const ShrunkHessianDiag& shrunk);

}  // namespace pastsgd
