#include <benchmark/benchmark.h>

#include <vector>

#include "covertq/analytics.hpp"
#include "covertq/detect.hpp"
#include "covertq/simqueue.hpp"

using namespace covertq;

namespace {

SystemParams exp_exp() {
    return SystemParams::make(0.5, ServiceDist::exponential(1.0), ServiceDist::exponential(1.0));
}

void BM_SimulateIebp(benchmark::State& state) {
    const auto sp = exp_exp();
    const auto pol = Policy::iebp(0.3);
    std::uint64_t seed = 1;
    for (auto _ : state) {
        const auto t = simulate(sp, pol, static_cast<std::uint64_t>(state.range(0)), seed++,
                                [](const BusyPeriodObs&, const BusyPeriodTruth&) {});
        benchmark::DoNotOptimize(t.willie_served);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateIebp)->Arg(10000);

void BM_SimulateIIA(benchmark::State& state) {
    const auto sp = exp_exp();
    const auto pol = Policy::iia(0.2, BatchPMF({0.2, 0.5, 0.3}));
    std::uint64_t seed = 1;
    for (auto _ : state) {
        const auto t = simulate(sp, pol, 10000, seed++, [](const BusyPeriodObs&, const BusyPeriodTruth&) {});
        benchmark::DoNotOptimize(t.alice_inserted);
    }
    state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_SimulateIIA);

void BM_MeanSqrtZ(benchmark::State& state) {
    const auto sp = SystemParams::make(0.5, ServiceDist::exponential(1.5), ServiceDist::exponential(1.0));
    for (auto _ : state) benchmark::DoNotOptimize(mean_sqrt_z_deficit(sp, 0.01, Statistic::YV));
}
BENCHMARK(BM_MeanSqrtZ);

void BM_C0ErlangHyper(benchmark::State& state) {
    const auto sp = SystemParams::make(0.5, ServiceDist::erlang(2, 1.0), ServiceDist::hyperexp({{0.5, 0.6}, {0.5, 2.0}}));
    for (auto _ : state) benchmark::DoNotOptimize(c0(sp).value);
}
BENCHMARK(BM_C0ErlangHyper);

void BM_LogLikelihoodRatio(benchmark::State& state) {
    const auto sp = exp_exp();
    DetectorSpec spec;
    spec.assumed_q = 0.1;
    const auto run_ = run(sp, Policy::iebp(0.1), 10000, 3);
    std::vector<Observation> obs;
    for (const auto& bp : run_.bps) obs.push_back({bp.y, bp.v});
    for (auto _ : state) benchmark::DoNotOptimize(loglr(spec, sp, obs));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(obs.size()));
}
BENCHMARK(BM_LogLikelihoodRatio);

}  // namespace
BENCHMARK_MAIN();
