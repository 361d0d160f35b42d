#include <benchmark/benchmark.h>

#include <random>

#include "pinnworks/loss.hpp"
#include "pinnworks/models.hpp"
#include "pinnworks/net.hpp"
#include "pinnworks/odeint.hpp"
#include "pinnworks/optim.hpp"

using namespace pinnworks;

namespace {

const std::vector<std::size_t> kHidden{10, 10, 10};

void BM_Forward(benchmark::State& state) {
  const auto ens = init_ensemble(NetworkMode::symbolic, 2, kHidden, 0);
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward(ens.layout, t, ens.theta));
    t += 1e-3;
  }
}
BENCHMARK(BM_Forward);

void BM_ForwardWithTimeDerivative(benchmark::State& state) {
  const auto ens = init_ensemble(NetworkMode::symbolic, 2, kHidden, 0);
  NetworkEvaluator ev(ens.layout);
  double t = 0.0;
  for (auto _ : state) {
    ev.evaluate(t, ens.theta);
    benchmark::DoNotOptimize(ev.time_derivative().data());
    t += 1e-3;
  }
}
BENCHMARK(BM_ForwardWithTimeDerivative);

// One full loss + gradient on the normal case: 1000 collocation points, 502 parameters.
void BM_LossGradient(benchmark::State& state) {
  const auto [sys, sc] = preset("normal");
  const auto mode = state.range(0) ? NetworkMode::conventional : NetworkMode::symbolic;
  const std::vector<std::size_t> hidden = state.range(0) ? std::vector<std::size_t>{20, 20, 20, 20} : kHidden;
  const auto ens = init_ensemble(mode, 2, hidden, 0);
  LossEvaluator ev(sys, ens.layout, SamplingPlan::grid(sys.t0(), sys.t1(), 0.01));
  const auto assembly = LossAssembly::uniform(2);
  std::vector<double> grad(ens.theta.size());
  for (auto _ : state) benchmark::DoNotOptimize(ev.value_and_gradient(assembly, ens.theta, grad));
  state.SetLabel(ens.layout.describe());
}
BENCHMARK(BM_LossGradient)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_InverseHessianUpdate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  InverseHessian h(n);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<double> s(n), y(n);
  for (auto _ : state) {
    state.PauseTiming();
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = u(rng);
      y[i] = s[i] * u(rng);
    }
    state.ResumeTiming();
    benchmark::DoNotOptimize(h.update(s, y));
  }
}
BENCHMARK(BM_InverseHessianUpdate)->Arg(502)->Arg(1342)->Unit(benchmark::kMicrosecond);

void BM_ReferenceAdaptive(benchmark::State& state) {
  const auto [sys, sc] = preset("normal");
  AdaptiveOptions opt;
  opt.abs_tol = opt.rel_tol = 1e-10;
  for (auto _ : state) benchmark::DoNotOptimize(integrate_adaptive(sys, opt).size());
}
BENCHMARK(BM_ReferenceAdaptive)->Unit(benchmark::kMillisecond);

void BM_ReferenceFixed(benchmark::State& state) {
  const auto [sys, sc] = preset("normal");
  for (auto _ : state) benchmark::DoNotOptimize(integrate_fixed(sys, 1e-3).size());
}
BENCHMARK(BM_ReferenceFixed)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
