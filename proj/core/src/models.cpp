#include "pastsgd/models.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pastsgd {

double Model::loss_and_gradient(std::span<const double> theta, const Example& ex,
                                std::span<double> out) const {
  gradient(theta, ex, out);
  return loss(theta, ex);
}

void Model::hessian_diag(std::span<const double>, const Example&, std::span<double>) const {
  throw std::invalid_argument(std::string("hessian_diag: unsupported for model '") + name() +
                              "'; curvature-aware sizing needs a model with an analytic "
                              "Hessian diagonal");
}

namespace {

void check_dims(const char* who, const Model& m, std::span<const double> theta,
                const Example& ex) {
  if (long(theta.size()) != m.param_count())
    throw std::invalid_argument(std::string(who) + ": parameter vector size " +
                                std::to_string(theta.size()) + " does not match " +
                                std::to_string(m.param_count()));
  if (long(ex.features.size()) != m.input_dim())
    throw std::invalid_argument(std::string(who) + ": feature vector size " +
                                std::to_string(ex.features.size()) + " does not match input " +
                                std::to_string(m.input_dim()));
}

long class_target(const char* who, const Example& ex, long classes) {
  long y = long(ex.target);
  if (y < 0 || y >= classes)
    throw std::invalid_argument(std::string(who) + ": target class " + std::to_string(y) +
                                " outside [0, " + std::to_string(classes) + ")");
  return y;
}

// log(sum exp(z)) and softmax probabilities, max-shifted for stability
double softmax_probs(std::span<const double> logits, std::span<double> probs) {
  double m = logits[0];
  for (double z : logits)
    if (z > m) m = z;
  double s = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) s += std::exp(logits[k] - m);
  double lse = m + std::log(s);
  for (std::size_t k = 0; k < logits.size(); ++k) probs[k] = std::exp(logits[k] - lse);
  return lse;
}

class LinearRegressionModel final : public Model {
 public:
  explicit LinearRegressionModel(long in_dim) : in_dim_(in_dim) {
    if (in_dim < 0) throw std::invalid_argument("LinearRegression: negative input dimension");
  }

  long param_count() const override { return in_dim_ + 1; }  // weights + bias
  long input_dim() const override { return in_dim_; }
  TaskKind task() const override { return TaskKind::Regression; }
  const char* name() const override { return "linear_regression"; }

  double predict(std::span<const double> theta, std::span<const double> x) const override {
    double v = theta[std::size_t(in_dim_)];  // bias
    for (long j = 0; j < in_dim_; ++j) v += theta[std::size_t(j)] * x[std::size_t(j)];
    return v;
  }

  double loss(std::span<const double> theta, const Example& ex) const override {
    check_dims("loss", *this, theta, ex);
    double r = predict(theta, ex.features) - ex.target;
    return r * r;
  }

  void gradient(std::span<const double> theta, const Example& ex,
                std::span<double> out) const override {
    check_dims("gradient", *this, theta, ex);
    double r = predict(theta, ex.features) - ex.target;
    for (long j = 0; j < in_dim_; ++j) out[std::size_t(j)] = 2.0 * r * ex.features[std::size_t(j)];
    out[std::size_t(in_dim_)] = 2.0 * r;
  }

  double loss_and_gradient(std::span<const double> theta, const Example& ex,
                           std::span<double> out) const override {
    check_dims("loss_and_gradient", *this, theta, ex);
    double r = predict(theta, ex.features) - ex.target;
    for (long j = 0; j < in_dim_; ++j) out[std::size_t(j)] = 2.0 * r * ex.features[std::size_t(j)];
    out[std::size_t(in_dim_)] = 2.0 * r;
    return r * r;
  }

  bool supports_hessian_diag() const override { return true; }
  void hessian_diag(std::span<const double> theta, const Example& ex,
                    std::span<double> out) const override {
    check_dims("hessian_diag", *this, theta, ex);
    for (long j = 0; j < in_dim_; ++j) {
      double x = ex.features[std::size_t(j)];
      out[std::size_t(j)] = 2.0 * x * x;
    }
    out[std::size_t(in_dim_)] = 2.0;
  }

  void init_params(std::span<double> theta, std::mt19937_64&) const override {
    for (double& t : theta) t = 0.0;  // zero start; R2 then begins near 0
  }

 private:
  long in_dim_;
};

class LogisticRegressionModel final : public Model {
 public:
  LogisticRegressionModel(long in_dim, long classes) : in_dim_(in_dim), classes_(classes) {
    if (in_dim < 1) throw std::invalid_argument("LogisticRegression: input dimension must be >= 1");
    if (classes < 2) throw std::invalid_argument("LogisticRegression: need at least 2 classes");
  }

  long param_count() const override { return classes_ * (in_dim_ + 1); }
  long input_dim() const override { return in_dim_; }
  TaskKind task() const override { return TaskKind::Classification; }
  long num_classes() const override { return classes_; }
  const char* name() const override { return "logistic_regression"; }

  // layout: class-major weight blocks [k*in_dim .. ), then biases at classes*in_dim + k
  void logits(std::span<const double> theta, std::span<const double> x,
              std::span<double> out) const {
    const std::size_t p = std::size_t(in_dim_);
    for (long k = 0; k < classes_; ++k) {
      const double* w = theta.data() + std::size_t(k) * p;
      double z = theta[std::size_t(classes_) * p + std::size_t(k)];
      for (std::size_t j = 0; j < p; ++j) z += w[j] * x[j];
      out[std::size_t(k)] = z;
    }
  }

  double predict(std::span<const double> theta, std::span<const double> x) const override {
    std::vector<double> z(std::size_t(classes_), 0.0);
    logits(theta, x, z);
    std::size_t best = 0;
    for (std::size_t k = 1; k < z.size(); ++k)
      if (z[k] > z[best]) best = k;
    return double(best);
  }

  double loss(std::span<const double> theta, const Example& ex) const override {
    check_dims("loss", *this, theta, ex);
    long y = class_target("loss", ex, classes_);
    std::vector<double> z(std::size_t(classes_), 0.0), p(std::size_t(classes_), 0.0);
    logits(theta, ex.features, z);
    double lse = softmax_probs(z, p);
    return lse - z[std::size_t(y)];
  }

  void gradient(std::span<const double> theta, const Example& ex,
                std::span<double> out) const override {
    loss_and_gradient(theta, ex, out);
  }

  double loss_and_gradient(std::span<const double> theta, const Example& ex,
                           std::span<double> out) const override {
    check_dims("loss_and_gradient", *this, theta, ex);
    long y = class_target("loss_and_gradient", ex, classes_);
    std::vector<double> z(std::size_t(classes_), 0.0), p(std::size_t(classes_), 0.0);
    logits(theta, ex.features, z);
    double lse = softmax_probs(z, p);
    const std::size_t pd = std::size_t(in_dim_);
    for (long k = 0; k < classes_; ++k) {
      double resid = p[std::size_t(k)] - (k == y ? 1.0 : 0.0);
      double* gw = out.data() + std::size_t(k) * pd;
      for (std::size_t j = 0; j < pd; ++j) gw[j] = resid * ex.features[j];
      out[std::size_t(classes_) * pd + std::size_t(k)] = resid;
    }
    return lse - z[std::size_t(y)];
  }

  bool supports_hessian_diag() const override { return true; }
  void hessian_diag(std::span<const double> theta, const Example& ex,
                    std::span<double> out) const override {
    check_dims("hessian_diag", *this, theta, ex);
    class_target("hessian_diag", ex, classes_);
    std::vector<double> z(std::size_t(classes_), 0.0), p(std::size_t(classes_), 0.0);
    logits(theta, ex.features, z);
    softmax_probs(z, p);
    const std::size_t pd = std::size_t(in_dim_);
    for (long k = 0; k < classes_; ++k) {
      double curv = p[std::size_t(k)] * (1.0 - p[std::size_t(k)]);
      double* hw = out.data() + std::size_t(k) * pd;
      for (std::size_t j = 0; j < pd; ++j) hw[j] = curv * ex.features[j] * ex.features[j];
      out[std::size_t(classes_) * pd + std::size_t(k)] = curv;
    }
  }

  void init_params(std::span<double> theta, std::mt19937_64& rng) const override {
    double limit = std::sqrt(6.0 / double(in_dim_ + classes_));
    std::uniform_real_distribution<double> dist(-limit, limit);
    const std::size_t weights = std::size_t(classes_) * std::size_t(in_dim_);
    for (std::size_t i = 0; i < weights; ++i) theta[i] = dist(rng);
    for (std::size_t i = weights; i < theta.size(); ++i) theta[i] = 0.0;
  }

 private:
  long in_dim_;
  long classes_;
};

class MlpModel final : public Model {
 public:
  MlpModel(long in_dim, std::vector<long> hidden, long classes) {
    if (in_dim < 1) throw std::invalid_argument("Mlp: input dimension must be >= 1");
    if (hidden.empty())
      throw std::invalid_argument("Mlp: need at least one hidden layer (use the plain softmax "
                                  "classifier otherwise)");
    if (classes < 2) throw std::invalid_argument("Mlp: need at least 2 classes");
    sizes_.push_back(in_dim);
    for (long h : hidden) {
      if (h < 1) throw std::invalid_argument("Mlp: hidden layer sizes must be >= 1");
      sizes_.push_back(h);
    }
    sizes_.push_back(classes);
    long total = 0;
    for (std::size_t l = 1; l < sizes_.size(); ++l) {
      layer_offset_.push_back(total);
      total += sizes_[l] * sizes_[l - 1] + sizes_[l];
    }
    param_count_ = total;
  }

  long param_count() const override { return param_count_; }
  long input_dim() const override { return sizes_.front(); }
  TaskKind task() const override { return TaskKind::Classification; }
  long num_classes() const override { return sizes_.back(); }
  const char* name() const override { return "mlp"; }

  double predict(std::span<const double> theta, std::span<const double> x) const override {
    Scratch s;
    forward(theta, x, s);
    const Vec& z = s.act.back();
    std::size_t best = 0;
    for (std::size_t k = 1; k < z.size(); ++k)
      if (z[k] > z[best]) best = k;
    return double(best);
  }

  double loss(std::span<const double> theta, const Example& ex) const override {
    check_dims("loss", *this, theta, ex);
    long y = class_target("loss", ex, num_classes());
    Scratch s;
    forward(theta, ex.features, s);
    const Vec& z = s.act.back();
    std::vector<double> p(z.size());
    double lse = softmax_probs(z, p);
    return lse - z[std::size_t(y)];
  }

  double loss_and_gradient(std::span<const double> theta, const Example& ex,
                           std::span<double> out) const override {
    check_dims("loss_and_gradient", *this, theta, ex);
    long y = class_target("loss_and_gradient", ex, num_classes());
    Scratch s;
    forward(theta, ex.features, s);
    const Vec& z = s.act.back();
    std::vector<double> delta(z.size());
    double lse = softmax_probs(z, delta);  // delta starts as the probabilities
    double value = lse - z[std::size_t(y)];
    delta[std::size_t(y)] -= 1.0;

    // walk layers backwards: out-slice per layer is [W rows, then biases]
    for (std::size_t l = sizes_.size() - 1; l >= 1; --l) {
      const long rows = sizes_[l], cols = sizes_[l - 1];
      const Vec& below = l >= 2 ? s.act[l - 1] : s.input;
      double* gw = out.data() + layer_offset_[l - 1];
      double* gb = gw + rows * cols;
      for (long r = 0; r < rows; ++r) {
        for (long c = 0; c < cols; ++c) gw[r * cols + c] = delta[std::size_t(r)] * below[std::size_t(c)];
        gb[r] = delta[std::size_t(r)];
      }
      if (l == 1) break;
      const double* w = theta.data() + layer_offset_[l - 1];
      std::vector<double> next(std::size_t(cols), 0.0);
      for (long r = 0; r < rows; ++r)
        for (long c = 0; c < cols; ++c) next[std::size_t(c)] += w[r * cols + c] * delta[std::size_t(r)];
      // ReLU gate: the layer below is active where its output is positive
      for (long c = 0; c < cols; ++c)
        if (!(s.act[l - 1][std::size_t(c)] > 0.0)) next[std::size_t(c)] = 0.0;
      delta = std::move(next);
    }
    return value;
  }

  void gradient(std::span<const double> theta, const Example& ex,
                std::span<double> out) const override {
    loss_and_gradient(theta, ex, out);
  }

  void init_params(std::span<double> theta, std::mt19937_64& rng) const override {
    for (std::size_t l = 1; l < sizes_.size(); ++l) {
      const long rows = sizes_[l], cols = sizes_[l - 1];
      double limit = std::sqrt(6.0 / double(rows + cols));
      std::uniform_real_distribution<double> dist(-limit, limit);
      double* w = theta.data() + layer_offset_[l - 1];
      for (long i = 0; i < rows * cols; ++i) w[i] = dist(rng);
      double* b = w + rows * cols;
      for (long i = 0; i < rows; ++i) b[i] = 0.0;
    }
  }

 private:
  struct Scratch {
    Vec input;
    std::vector<Vec> act;  // act[l] for l >= 1; last entry holds raw logits
  };

  void forward(std::span<const double> theta, std::span<const double> x, Scratch& s) const {
    s.input.assign(x.begin(), x.end());
    s.act.assign(sizes_.size(), Vec());
    const Vec* below = &s.input;
    for (std::size_t l = 1; l < sizes_.size(); ++l) {
      const long rows = sizes_[l], cols = sizes_[l - 1];
      const double* w = theta.data() + layer_offset_[l - 1];
      const double* b = w + rows * cols;
      Vec& a = s.act[l];
      a.assign(std::size_t(rows), 0.0);
      for (long r = 0; r < rows; ++r) {
        double z = b[r];
        for (long c = 0; c < cols; ++c) z += w[r * cols + c] * (*below)[std::size_t(c)];
        bool is_output = (l + 1 == sizes_.size());
        a[std::size_t(r)] = is_output ? z : (z > 0.0 ? z : 0.0);
      }
      below = &a;
    }
  }

  std::vector<long> sizes_;
  std::vector<long> layer_offset_;
  long param_count_ = 0;
};

}  // namespace

std::unique_ptr<Model> make_model(const ModelSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::unique_ptr<Model> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, LinearRegressionSpec>)
          return std::make_unique<LinearRegressionModel>(s.in_dim);
        if constexpr (std::is_same_v<T, LogisticRegressionSpec>)
          return std::make_unique<LogisticRegressionModel>(s.in_dim, s.classes);
        if constexpr (std::is_same_v<T, MlpSpec>)
          return std::make_unique<MlpModel>(s.in_dim, s.hidden, s.classes);
      },
      spec);
}

double per_sample_loss(const Model& model, std::span<const double> theta, const Example& ex) {
  return model.loss(theta, ex);
}

Vec per_sample_gradient(const Model& model, std::span<const double> theta, const Example& ex) {
  Vec g(std::size_t(model.param_count()));
  model.gradient(theta, ex, g);
  return g;
}

Vec per_sample_hessian_diag(const Model& model, std::span<const double> theta, const Example& ex) {
  Vec h(std::size_t(model.param_count()));
  model.hessian_diag(theta, ex, h);
  return h;
}

}  // namespace pastsgd
