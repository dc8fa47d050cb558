// Microbenchmarks for the hot paths: deviation bounds, batch sizers,
// per-sample gradients and statistics accumulation.

#include <benchmark/benchmark.h>

#include <random>

#include "pastsgd/batch_size.hpp"
#include "pastsgd/concentration.hpp"
#include "pastsgd/models.hpp"
#include "pastsgd/vec_stats.hpp"

namespace {

using namespace pastsgd;

Vec random_vec(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  Vec v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

void BM_VectorBound(benchmark::State& state, BoundKind kind) {
  long d = state.range(0);
  std::mt19937_64 rng(7);
  Vec var(std::size_t(d), 0.0);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (double& v : var) v = u(rng);
  DistributionInfo info(5.0, var, d);
  for (auto _ : state) benchmark::DoNotOptimize(vector_bound(kind, 128, 0.1, info));
}

void BM_LpastClosedForm(benchmark::State& state, BoundKind kind) {
  long d = state.range(0);
  std::mt19937_64 rng(7);
  Vec var(std::size_t(d), 0.0);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (double& v : var) v = u(rng);
  for (auto _ : state)
    benchmark::DoNotOptimize(lpast_closed_form(kind, 0.8, 4.0, var, 0.1, d));
}

void BM_QpastNumeric(benchmark::State& state) {
  long d = state.range(0);
  std::mt19937_64 rng(7);
  SizerContext ctx;
  ctx.stats.mean = random_vec(std::size_t(d), rng, 0.1);
  ctx.stats.variance = random_vec(std::size_t(d), rng);
  for (double& v : *ctx.stats.variance) v = v * v + 0.01;
  ctx.stats.n = 32;
  ctx.stats.norm = l2_norm(ctx.stats.mean);
  BatchHessianDiagStats hess;
  hess.mean_diag = random_vec(std::size_t(d), rng, 0.5);
  hess.var_diag = random_vec(std::size_t(d), rng);
  for (double& v : *hess.var_diag) v = v * v + 0.01;
  hess.n = 32;
  ctx.hess = hess;
  ctx.hessian_range = Vec(std::size_t(d), 2.0);
  ctx.L = 4.0;
  ctx.n_min = 2;
  ctx.n_max = 4096;
  ctx.d = d;
  for (auto _ : state)
    benchmark::DoNotOptimize(qpast_numeric(ctx, BoundKind::Bernstein, 0.1));
}

void BM_GradientAccumulate(benchmark::State& state) {
  long d = state.range(0);
  std::mt19937_64 rng(7);
  std::vector<Vec> grads;
  for (int i = 0; i < 64; ++i) grads.push_back(random_vec(std::size_t(d), rng));
  for (auto _ : state) {
    GradientAccumulator acc(d);
    for (const Vec& g : grads) acc.add(g);
    benchmark::DoNotOptimize(acc.finalize());
  }
}

void BM_ModelGradient(benchmark::State& state, ModelSpec spec) {
  auto model = make_model(spec);
  std::mt19937_64 rng(7);
  Vec theta(std::size_t(model->param_count()));
  model->init_params(theta, rng);
  Vec x = random_vec(std::size_t(model->input_dim()), rng);
  Example ex{x, model->task() == TaskKind::Classification ? 1.0 : 0.5};
  Vec grad(theta.size());
  for (auto _ : state) {
    model->gradient(theta, ex, grad);
    benchmark::DoNotOptimize(grad.data());
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_VectorBound, hoeffding, pastsgd::BoundKind::Hoeffding)->Arg(10)->Arg(784);
BENCHMARK_CAPTURE(BM_VectorBound, bernstein, pastsgd::BoundKind::Bernstein)->Arg(10)->Arg(784);
BENCHMARK_CAPTURE(BM_LpastClosedForm, hoeffding, pastsgd::BoundKind::Hoeffding)->Arg(10)->Arg(784);
BENCHMARK_CAPTURE(BM_LpastClosedForm, bernstein, pastsgd::BoundKind::Bernstein)->Arg(10)->Arg(784);
BENCHMARK(BM_QpastNumeric)->Arg(10)->Arg(100);
BENCHMARK(BM_GradientAccumulate)->Arg(10)->Arg(784);
BENCHMARK_CAPTURE(BM_ModelGradient, linear, pastsgd::ModelSpec(pastsgd::LinearRegressionSpec{19}));
BENCHMARK_CAPTURE(BM_ModelGradient, logistic,
                  pastsgd::ModelSpec(pastsgd::LogisticRegressionSpec{784, 10}));
BENCHMARK_CAPTURE(BM_ModelGradient, mlp, pastsgd::ModelSpec(pastsgd::MlpSpec{784, {32}, 10}));

BENCHMARK_MAIN();
