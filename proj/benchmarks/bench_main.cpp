#include <cmath>

#include <benchmark/benchmark.h>

#include "glmcomb/asymptotics.hpp"
#include "glmcomb/estimators.hpp"
#include "glmcomb/preopt.hpp"

using namespace glmcomb;

namespace {

const Channel& quad_channel() {
  static const Channel ch = make_channel("0.3x+x^2", std::sqrt(0.2));
  return ch;
}

Instance make(int d) {
  return sample_instance(SignalPrior::gaussian_sphere(), quad_channel(), d, 5.0, 1);
}

}  // namespace

static void BM_SampleInstance(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(make(d));
}
BENCHMARK(BM_SampleInstance)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_LinearEstimate(benchmark::State& state) {
  const Instance inst = make(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(linear_estimate(inst, identity_preprocessor()));
}
BENCHMARK(BM_LinearEstimate)->Arg(250)->Arg(1000)->Arg(2000)->Unit(benchmark::kMicrosecond);

static void BM_SpectralPowerIteration(benchmark::State& state) {
  const Instance inst = make(static_cast<int>(state.range(0)));
  int iters = 0;
  for (auto _ : state) {
    const auto rep = spectral_estimate(inst, clip_preprocessor(3.5));
    iters = rep.iterations;
    benchmark::DoNotOptimize(rep.eigvec.data());
  }
  state.counters["iterations"] = iters;
}
BENCHMARK(BM_SpectralPowerIteration)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_Predict(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  PredictOptions po;
  po.order = order;
  for (auto _ : state) {
    benchmark::DoNotOptimize(predict(SignalPrior::gaussian_sphere(), quad_channel(), identity_preprocessor(),
                                     clip_preprocessor(3.5), 5.0, po));
  }
}
BENCHMARK(BM_Predict)->Arg(40)->Arg(80)->Arg(160)->Unit(benchmark::kMillisecond);

static void BM_DeltaStar(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(delta_star(quad_channel()));
}
BENCHMARK(BM_DeltaStar)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
