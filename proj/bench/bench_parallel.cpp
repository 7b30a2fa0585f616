// Serial versus OpenMP timings for the grid-mapped invariant kernels.

#include <benchmark/benchmark.h>

#include "flagshift/flag_models.hpp"
#include "flagshift/invariants.hpp"
#include "flagshift/kernels.hpp"
#include "flagshift/parallel.hpp"

using namespace flagshift;

namespace {

FlagOperator model(int N) {
    return build_flag2(binomial_kernel(1.0, N + 48), binomial_kernel(3.0, N + 48), 1.0, N);
}

void bench_invariant_report(benchmark::State& state, Exec exec) {
    const int N = static_cast<int>(state.range(0));
    const FlagOperator T = model(N);
    const auto grid = polar_grid(8, 16, 0.5);
    for (auto _ : state) {
        const InvariantReport rep = invariant_report(T, grid, exec);
        benchmark::DoNotOptimize(rep.curvature_last.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long long>(grid.size()));
}

void bench_curvature_map(benchmark::State& state, Exec exec) {
    const DiagonalKernel K = binomial_kernel(2.0, static_cast<int>(state.range(0)));
    const auto grid = polar_grid(16, 32, 0.6);
    for (auto _ : state) {
        const auto values = map_indexed<double>(
            grid.size(), [&](std::size_t i) { return curvature_line(K, grid[i]).value; }, exec);
        benchmark::DoNotOptimize(values.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long long>(grid.size()));
}

void invariant_report_serial(benchmark::State& s) { bench_invariant_report(s, Exec::serial); }
void invariant_report_parallel(benchmark::State& s) { bench_invariant_report(s, Exec::parallel); }
void curvature_map_serial(benchmark::State& s) { bench_curvature_map(s, Exec::serial); }
void curvature_map_parallel(benchmark::State& s) { bench_curvature_map(s, Exec::parallel); }

} // namespace

BENCHMARK(invariant_report_serial)->Arg(32)->Arg(48)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(invariant_report_parallel)->Arg(32)->Arg(48)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(curvature_map_serial)->Arg(96)->Arg(192)->Unit(benchmark::kMillisecond);
BENCHMARK(curvature_map_parallel)->Arg(96)->Arg(192)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
