#include "bandgen/datasets.hpp"
#include "bandgen/metrics.hpp"
#include "bandgen/parallel.hpp"

#include <benchmark/benchmark.h>

using namespace bandgen;

namespace {

const std::vector<Graph>& corpus()
{
    static const auto graphs = gen_planar(64, 1, Exec::Serial);
    return graphs;
}

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::Parallel : Exec::Serial; }

void configure(benchmark::State& state)
{
    set_num_workers(static_cast<int>(state.range(1)));
    state.SetLabel(state.range(0) ? "parallel" : "serial");
}

void BM_ComputeStats(benchmark::State& state)
{
    configure(state);
    for (auto _ : state)
        benchmark::DoNotOptimize(compute_stats(corpus(), {}, exec_of(state)));
}

void BM_KernelMean(benchmark::State& state)
{
    configure(state);
    std::vector<std::vector<double>> hists;
    for (const auto& g : corpus())
        hists.push_back(degree_histogram(g));
    const Kernel k{Kernel::Base::Wasserstein, 1.0, 1.0};
    for (auto _ : state)
        benchmark::DoNotOptimize(kernel_mean(hists, hists, k, exec_of(state)));
}

void BM_CMBandwidths(benchmark::State& state)
{
    configure(state);
    const OrderingConfig cfg;
    for (auto _ : state)
        benchmark::DoNotOptimize(cm_bandwidths(corpus(), cfg, exec_of(state)));
}

void args(benchmark::internal::Benchmark* b)
{
    b->Args({0, 1});
    for (int w : {2, 4, 8})
        b->Args({1, w});
    b->ArgNames({"parallel", "workers"})->Unit(benchmark::kMillisecond);
}

} // namespace

BENCHMARK(BM_ComputeStats)->Apply(args);
BENCHMARK(BM_KernelMean)->Apply(args);
BENCHMARK(BM_CMBandwidths)->Apply(args);

BENCHMARK_MAIN();
