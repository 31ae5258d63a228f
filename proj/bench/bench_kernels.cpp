// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <omp.h>

#include "disorder/montecarlo.hpp"
#include "disorder/oracle.hpp"
#include "disorder/solver.hpp"

using namespace disorder;

namespace {

DisorderModel three_state(int d1) {
    DisorderModel m;
    m.prior = {0.0, 0.9};
    m.kernel0 = MarkovKernel({{0.8, 0.15, 0.05}, {0.1, 0.8, 0.1}, {0.05, 0.15, 0.8}});
    m.kernel1 = MarkovKernel({{0.3, 0.3, 0.4}, {0.2, 0.3, 0.5}, {0.1, 0.3, 0.6}});
    m.window = {d1, 1};
    m.states = {"low", "mid", "high"};
    return m;
}

void BM_SweepSerial(benchmark::State& state) {
    const auto m = three_state(static_cast<int>(state.range(0)));
    const ThresholdOperator op(m);
    const auto prev = r0_table(m).values;
    std::vector<double> next(prev.size());
    for (auto _ : state) {
        op.apply_serial(prev, next);
        benchmark::DoNotOptimize(next.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(prev.size()));
}

void BM_SweepParallel(benchmark::State& state) {
    const auto m = three_state(static_cast<int>(state.range(0)));
    const ThresholdOperator op(m);
    const auto prev = r0_table(m).values;
    std::vector<double> next(prev.size());
    for (auto _ : state) {
        op.apply_parallel(prev, next);
        benchmark::DoNotOptimize(next.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(prev.size()));
}

void run_replications(benchmark::State& state, bool parallel) {
    const auto m = three_state(1);
    const auto table = solve_threshold(m, 1e-10).first;
    ExperimentConfig config;
    config.replications = static_cast<std::size_t>(state.range(0));
    config.parallel = parallel;
    for (auto _ : state) {
        auto r = estimate_success(m, table, config);
        benchmark::DoNotOptimize(r.success_rate);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ReplicationsSerial(benchmark::State& state) { run_replications(state, false); }
void BM_ReplicationsParallel(benchmark::State& state) { run_replications(state, true); }

void BM_Enumerate(benchmark::State& state) {
    const auto m = three_state(1);
    for (auto _ : state) {
        auto joint = enumerate_joint(m, static_cast<std::size_t>(state.range(0)));
        benchmark::DoNotOptimize(joint.total_mass());
    }
}

}  // namespace

BENCHMARK(BM_SweepSerial)->Arg(4)->Arg(6)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SweepParallel)->Arg(4)->Arg(6)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ReplicationsSerial)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReplicationsParallel)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Enumerate)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
