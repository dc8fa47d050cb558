#pragma once

#include <variant>

#include "pastsgd/improvement.hpp"
#include "pastsgd/vec_stats.hpp"

namespace pastsgd {

struct ConstantStepSpec {
  double eta = 0.01;
};
struct RmspropStepSpec {
  double lr = 0.001;
  double rho = 0.9;
  double epsilon = 1e-8;
};
using StepRuleSpec = std::variant<ConstantStepSpec, RmspropStepSpec>;

// Stateful step-size rule: constant global eta, or the RMSprop diagonal
// preconditioner with a decaying squared-gradient accumulator.
class StepRule {
 public:
  static StepRule constant(double eta);
  static StepRule rmsprop(double lr, double rho, double epsilon);
  static StepRule from_spec(const StepRuleSpec& spec);

  bool is_diagonal() const { return diagonal_; }

  // Constant: returns the global eta untouched. RMSprop: folds the gradient
  // into the accumulator (E <- rho*E + (1-rho) g*g) and returns the
  // per-parameter scale lr / sqrt(E + eps). One call per optimizer step.
  StepScale step_scale(std::span<const double> grad);

  const Vec& accumulator() const { return accumulator_; }

 private:
  StepRule() = default;

  bool diagonal_ = false;
  double eta_ = 0.01;
  double lr_ = 0.001;
  double rho_ = 0.9;
  double epsilon_ = 1e-8;
  Vec accumulator_;
};

// Scalar summary of a scale for formulas that need one number: the global
// eta itself, or the largest per-parameter entry (conservative).
double effective_scalar_eta(const StepScale& scale);

}  // namespace pastsgd
