#include <benchmark/benchmark.h>

#include "bscca/coupling.hpp"
#include "bscca/sampler.hpp"
#include "bscca/simdata.hpp"

using namespace bscca;

namespace {

struct Fixture {
  PopulationModel model;
  GepPair gep;
  PriorConfig prior;
  TemperingLadder ladder;

  explicit Fixture(Index p)
      : model(build_population_cov(p)),
        gep(estimate_gep(sample_gaussian_pairs(model, p / 2, 1), Estimator::kSample)),
        prior(PriorConfig::defaults_for(p)),
        ladder(TemperingLadder::with_scaled_steps(TemperingLadder::default_temperatures(), p)) {}
};

}  // namespace

static void BM_GibbsSweep(benchmark::State& state) {
  const Index p = state.range(0);
  Fixture f(p);
  Rng rng(2);
  ChainState s = initial_state(p, rng);
  QuadraticCache cache(f.gep, s);
  for (auto _ : state) {
    auto plan = draw_gibbs_plan(p, std::min<Index>(100, p), rng);
    gibbs_update_delta(s, cache, plan, rng, f.gep, f.prior, f.ladder);
    benchmark::DoNotOptimize(cache.qa());
  }
  state.SetItemsProcessed(state.iterations() * std::min<Index>(100, p));
}
BENCHMARK(BM_GibbsSweep)->Arg(100)->Arg(500)->Arg(1000);

static void BM_MalaStep(benchmark::State& state) {
  const Index p = state.range(0);
  Fixture f(p);
  Rng rng(3);
  ChainState s = initial_state(p, rng);
  QuadraticCache cache(f.gep, s);
  for (auto _ : state) {
    auto out = mala_update_theta(s, cache, rng, f.gep, f.prior, f.ladder);
    benchmark::DoNotOptimize(out.accept_prob);
  }
}
BENCHMARK(BM_MalaStep)->Arg(100)->Arg(500)->Arg(1000);

static void BM_ChainIteration(benchmark::State& state) {
  const Index p = state.range(0);
  Fixture f(p);
  Rng rng(4);
  Chain chain(f.gep, f.prior, initial_state(p, rng), Rng(5), SamplerOptions{100, 1});
  for (auto _ : state) benchmark::DoNotOptimize(chain.step(f.ladder));
}
BENCHMARK(BM_ChainIteration)->Arg(100)->Arg(500);

static void BM_CoupledIteration(benchmark::State& state) {
  const Index p = state.range(0);
  Fixture f(p);
  Rng rng(6);
  auto x = initial_state(p, rng);
  auto y = initial_state(p, rng);
  CoupledChains pair(f.gep, f.prior, x, y, Rng(7), 100);
  for (auto _ : state) benchmark::DoNotOptimize(pair.step(f.ladder));
}
BENCHMARK(BM_CoupledIteration)->Arg(100)->Arg(500);

static void BM_KendallTau(benchmark::State& state) {
  const Index n = state.range(0);
  auto model = build_population_cov(100);
  auto data = sample_gaussian_pairs(model, n, 8);
  const Matrix z = data.joined();
  for (auto _ : state) benchmark::DoNotOptimize(kendall_tau_matrix(z));
}
BENCHMARK(BM_KendallTau)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
