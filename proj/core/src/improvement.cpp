#include "pastsgd/improvement.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace pastsgd {

StepScale StepScale::global(double eta) {
  if (!(eta > 0.0))
    throw std::invalid_argument("StepScale: global step size must be positive, got " +
                                std::to_string(eta));
  StepScale s;
  s.global_ = eta;
  return s;
}

StepScale StepScale::per_param(Vec entries) {
  if (entries.empty()) throw std::invalid_argument("StepScale: empty per-parameter vector");
  for (double e : entries)
    if (!(e > 0.0))
      throw std::invalid_argument("StepScale: per-parameter entries must be positive, got " +
                                  std::to_string(e));
  StepScale s;
  s.global_.reset();
  s.entries_ = std::move(entries);
  return s;
}

double StepScale::global_eta() const {
  if (!global_) throw std::invalid_argument("StepScale: not a global scale");
  return *global_;
}

std::span<const double> StepScale::entries() const {
  if (global_) throw std::invalid_argument("StepScale: not a per-parameter scale");
  return entries_;
}

double StepScale::max_entry() const {
  if (global_) return *global_;
  return *std::max_element(entries_.begin(), entries_.end());
}

double upsilon_linear(double eta, double grad_norm, double bound) {
  if (!(eta > 0.0))
    throw std::invalid_argument("upsilon_linear: step size must be positive, got " +
                                std::to_string(eta));
  if (grad_norm < 0.0)
    throw std::invalid_argument("upsilon_linear: gradient norm must be non-negative");
  if (bound < 0.0) throw std::invalid_argument("upsilon_linear: bound must be non-negative");
  return eta * (grad_norm - bound) * grad_norm;
}

ShrunkHessianDiag shrink_hessian_diag(const BatchHessianDiagStats& hess, BoundKind kind,
                                      double delta_per_entry,
                                      std::span<const double> range_per_entry, long n) {
  const std::size_t d = hess.mean_diag.size();
  if (range_per_entry.size() != d)
    throw std::invalid_argument("shrink_hessian_diag: range vector size " +
                                std::to_string(range_per_entry.size()) + " does not match " +
                                std::to_string(d));
  const bool needs_var = (kind == BoundKind::Chebyshev || kind == BoundKind::Bernstein);
  if (needs_var && !hess.var_diag)
    throw std::invalid_argument(
        "shrink_hessian_diag: Hessian variance unavailable for a variance-based bound");
  ShrunkHessianDiag out;
  out.values.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    double var = needs_var ? (*hess.var_diag)[i] : 0.0;
    double b = scalar_bound(kind, n, delta_per_entry, range_per_entry[i], var);
    out.values[i] = hess.mean_diag[i] - b;
  }
  return out;
}

double upsilon_quadratic(double eta, const BatchGradientStats& stats, double grad_bound,
                         const ShrunkHessianDiag& shrunk) {
  if (shrunk.values.size() != stats.mean.size())
    throw std::invalid_argument("upsilon_quadratic: shrunk diagonal size " +
                                std::to_string(shrunk.values.size()) + " does not match gradient " +
                                std::to_string(stats.mean.size()));
  double linear = upsilon_linear(eta, stats.norm, grad_bound);
  double quad = 0.0;
  for (std::size_t i = 0; i < shrunk.values.size(); ++i)
    quad += shrunk.values[i] * stats.mean[i] * stats.mean[i];
  return linear + 0.5 * eta * eta * quad;
}

double upsilon_diag_precond(std::span<const double> eta, const BatchGradientStats& stats,
                            std::span<const double> grad_bound_per_entry,
                            const ShrunkHessianDiag& shrunk) {
  const std::size_t d = stats.mean.size();
  if (eta.size() != d || grad_bound_per_entry.size() != d || shrunk.values.size() != d)
    throw std::invalid_argument("upsilon_diag_precond: length mismatch across inputs");
  for (double e : eta)
    if (!(e > 0.0))
      throw std::invalid_argument("upsilon_diag_precond: step entries must be positive, got " +
                                  std::to_string(e));
  double linear = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    linear += eta[i] * stats.mean[i] * (stats.mean[i] - grad_bound_per_entry[i]);
  double quad = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double step = eta[i] * stats.mean[i];
    quad += shrunk.values[i] * step * step;
  }
  return linear + 0.5 * quad;
}

}  // namespace pastsgd
