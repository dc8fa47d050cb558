#pragma once

#include <memory>
#include <random>
#include <variant>

#include "pastsgd/dataset.hpp"
#include "pastsgd/vec_stats.hpp"

namespace pastsgd {

struct LinearRegressionSpec {
  long in_dim = 1;  // 0 is allowed: bias-only model
};
struct LogisticRegressionSpec {
  long in_dim = 1;
  long classes = 2;
};
struct MlpSpec {
  long in_dim = 1;
  std::vector<long> hidden;  // at least one hidden layer (ReLU)
  long classes = 2;
};
using ModelSpec = std::variant<LinearRegressionSpec, LogisticRegressionSpec, MlpSpec>;

// A differentiable per-sample objective. Parameters live in a flat vector
// owned by the caller; all evaluation is read-only on theta.
class Model {
 public:
  virtual ~Model() = default;

  virtual long param_count() const = 0;
  virtual long input_dim() const = 0;
  virtual TaskKind task() const = 0;
  virtual long num_classes() const { return 0; }
  virtual const char* name() const = 0;

  virtual double loss(std::span<const double> theta, const Example& ex) const = 0;
  virtual void gradient(std::span<const double> theta, const Example& ex,
                        std::span<double> out) const = 0;
  // Shared forward pass where the model can provide one; defaults to
  // loss() followed by gradient().
  virtual double loss_and_gradient(std::span<const double> theta, const Example& ex,
                                   std::span<double> out) const;

  virtual bool supports_hessian_diag() const { return false; }
  virtual void hessian_diag(std::span<const double> theta, const Example& ex,
                            std::span<double> out) const;

  // Regression: predicted value. Classification: predicted class index.
  virtual double predict(std::span<const double> theta, std::span<const double> x) const = 0;

  // Fills theta with the model's starting point, drawing from rng where the
  // scheme is randomized.
  virtual void init_params(std::span<double> theta, std::mt19937_64& rng) const = 0;
};

std::unique_ptr<Model> make_model(const ModelSpec& spec);

// Allocating conveniences mirroring the span-based interface.
double per_sample_loss(const Model& model, std::span<const double> theta, const Example& ex);
Vec per_sample_gradient(const Model& model, std::span<const double> theta, const Example& ex);
Vec per_sample_hessian_diag(const Model& model, std::span<const double> theta, const Example& ex);

}  // namespace pastsgd
