#include "pastsgd/step_size.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pastsgd {

StepRule StepRule::constant(double eta) {
  if (!(eta > 0.0))
    throw std::invalid_argument("StepRule: constant eta must be positive, got " +
                                std::to_string(eta));
  StepRule r;
  r.diagonal_ = false;
  r.eta_ = eta;
  return r;
}

StepRule StepRule::rmsprop(double lr, double rho, double epsilon) {
  if (!(lr > 0.0))
    throw std::invalid_argument("StepRule: rmsprop lr must be positive, got " + std::to_string(lr));
  if (!(rho > 0.0 && rho < 1.0))
    throw std::invalid_argument("StepRule: rmsprop rho must lie in (0,1), got " +
                                std::to_string(rho));
  if (!(epsilon > 0.0))
    throw std::invalid_argument("StepRule: rmsprop epsilon must be positive, got " +
                                std::to_string(epsilon));
  StepRule r;
  r.diagonal_ = true;
  r.lr_ = lr;
  r.rho_ = rho;
  r.epsilon_ = epsilon;
  return r;
}

StepRule StepRule::from_spec(const StepRuleSpec& spec) {
  if (const auto* c = std::get_if<ConstantStepSpec>(&spec)) return constant(c->eta);
  const auto& r = std::get<RmspropStepSpec>(spec);
  return rmsprop(r.lr, r.rho, r.epsilon);
}

StepScale StepRule::step_scale(std::span<const double> grad) {
  if (!diagonal_) return StepScale::global(eta_);
  if (accumulator_.empty()) accumulator_.assign(grad.size(), 0.0);
  if (accumulator_.size() != grad.size())
    throw std::invalid_argument("StepRule: gradient size " + std::to_string(grad.size()) +
                                " does not match accumulator " +
                                std::to_string(accumulator_.size()));
  Vec eta(grad.size());
  for (std::size_t i = 0; i < grad.size(); ++i) {
    accumulator_[i] = rho_ * accumulator_[i] + (1.0 - rho_) * grad[i] * grad[i];
    eta[i] = lr_ / std::sqrt(accumulator_[i] + epsilon_);
  }
  return StepScale::per_param(std::move(eta));
}

double effective_scalar_eta(const StepScale& scale) { return scale.max_entry(); }

}  // namespace pastsgd
